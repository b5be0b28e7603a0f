"""
Citation graph bibliometrics
============================

Resolve extracted references against stored records, then compute
citation counts, co-citation and a damped link rank over the graph.
"""

from biblioforge import (
    BibRecord,
    CitationEntry,
    build_graph,
    citation_counts,
    cocitation,
    link_rank,
)

# Five records; references cite by report number or (journal, volume, page).
records = [
    BibRecord("classic", "The Classic Paper", report_numbers=["TH-70-001"],
              journal="Phys. Rev., A", volume="1", page="1"),
    BibRecord("followup", "A Follow-Up", report_numbers=["TH-75-002"]),
    BibRecord("survey", "The Survey", report_numbers=["TH-90-003"]),
    BibRecord("modern", "A Modern Take", report_numbers=["TH-05-004"]),
    BibRecord("outsider", "Unrelated Work", report_numbers=["TH-99-005"]),
]
by_id = {r.record_id: r for r in records}

by_id["followup"].references = [CitationEntry(raw="c", report_numbers=["TH-70-001"])]
by_id["survey"].references = [
    CitationEntry(raw="c", report_numbers=["TH-70-001"]),
    CitationEntry(raw="f", report_numbers=["TH-75-002"]),
]
by_id["modern"].references = [
    # resolves through the journal triple instead of a report number
    CitationEntry(raw="c", journal="Phys. Rev., A", volume="1", page="1"),
    CitationEntry(raw="f", report_numbers=["TH-75-002"]),
    CitationEntry(raw="gone", report_numbers=["LOST-99-9"]),  # stays unresolved
]

graph = build_graph(records)
print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges, "
      f"{graph.unresolved} unresolved entries")

print("\ncitation counts (in-degree):")
for record_id, count in sorted(citation_counts(graph).items(), key=lambda kv: -kv[1]):
    print(f"  {record_id:10} {count}")

# Co-citation: how many papers cite both at once.
pair = ("classic", "followup")
print(f"\nco-citation{pair} = {cocitation(graph, *pair)}")

# Link rank: damped power iteration, rank flows from citing to cited.
print("\nlink rank (damping 0.85):")
for record_id, score in sorted(link_rank(graph).items(), key=lambda kv: -kv[1]):
    print(f"  {record_id:10} {score:.6f}")
