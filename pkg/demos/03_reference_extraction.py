"""
Reference extraction in three passes
====================================

Locate the reference section of a plain-text paper, segment it into
citation entries, and normalize each entry against the journal knowledge
base, reconstructing URLs where the publisher template allows it.
"""

from biblioforge import (
    default_journal_kb_path,
    extract_references,
    load_journal_kb,
    locate_reference_section,
    normalize_journal,
    segment_entries,
)

PAPER = """\
A Toy Analysis

We prove a toy theorem. The literature on the subject is reviewed; the
main sources appear at the end of this note.

References

[1] A. Karlsson, Phys. Rev. A 41 (1990) 233
[2] B. Leroy and C. Mott, J. High Energy Phys. 11
    (2003) 48
[3] D. Granger, gr-qc/0607062
[4] E. Watt, New Scientist 180 (2003) 22, https://mirror.example/watt
"""

kb = load_journal_kb(default_journal_kb_path())

# Pass 1: the section spans from the last heading line to end of document.
start, end = locate_reference_section(PAPER)
print(f"reference section at [{start}:{end}], starts with {PAPER[start:start+10]!r}")

# Pass 2: split on the dominant marker style, joining wrapped lines.
for text in segment_entries(PAPER[start:end]):
    print("entry:", text)

# Journal normalization handles the alternative forms in the knowledge base.
print()
for alias in ("PRA", "JHEP", "A & A", "Unknown Journal"):
    print(f"normalize {alias!r:18} -> {normalize_journal(alias, kb)}")

# Pass 3: the whole pipeline, with structured fields and URLs.
print()
for entry in extract_references(PAPER, kb):
    print(f"{entry.marker} journal={entry.journal!r} volume={entry.volume!r} "
          f"page={entry.page!r} year={entry.year}")
    if entry.report_numbers:
        print("     report numbers:", ", ".join(entry.report_numbers))
    if entry.url:
        print("     url:", entry.url)
