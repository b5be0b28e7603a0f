"""
Controlled keywords from a taxonomy
===================================

Load a small taxonomy (preferred/alternative labels, broader links and
composite terms), assign keywords to a document by phrase occurrence, and
cluster documents by keyword overlap.
"""

import tempfile
from pathlib import Path

from biblioforge import cluster_documents, extract_keywords, load_taxonomy

# The taxonomy file format: "term:" opens a term, blank line ends it.
# A composite term counts sentences where both components occur.
TAXONOMY = """\
term: t_gravitation
pref: gravitation
alt: gravity

term: t_dilaton
pref: dilaton
broader: t_gravitation

term: t_moment
pref: magnetic moment

term: c_grav_dilaton
pref: gravitation, dilaton
composite: t_gravitation + t_dilaton
"""

DOCUMENT = """\
The dilaton is central to two-dimensional gravity. Dilaton gravitation
models are exactly soluble. The magnetic moment plays no role here, yet
magnetic moments appear once more for contrast. Gravitation couples to
the dilaton in every section of this note.
"""

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.tax"
    path.write_text(TAXONOMY, encoding="utf-8")
    taxonomy = load_taxonomy(path)

print(f"taxonomy: {len(taxonomy)} terms")
print("broader closure of t_dilaton:", taxonomy.broader_closure("t_dilaton"))

# Occurrence table, most frequent first.  Composite rows show the
# sentence co-occurrence count plus each component's document count.
print("\nOccurrence  Thesaurus keyword")
for ka in extract_keywords(DOCUMENT, taxonomy, max_results=10):
    if ka.component_counts:
        counts = f"{ka.occurrence} [{ka.component_counts[0]}, {ka.component_counts[1]}]"
    else:
        counts = str(ka.occurrence)
    print(f"{counts:<11} {ka.display_label}")

# Document clustering: Jaccard similarity over assigned term ids,
# connected components at the given threshold.
corpus = {
    "paper-a": extract_keywords("dilaton gravitation. dilaton.", taxonomy, 10),
    "paper-b": extract_keywords("gravity and the dilaton.", taxonomy, 10),
    "paper-c": extract_keywords("the magnetic moment.", taxonomy, 10),
}
print("\nclusters at threshold 0.4:", cluster_documents(corpus, 0.4))
