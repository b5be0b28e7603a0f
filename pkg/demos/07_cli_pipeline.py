"""
The full batch pipeline through the CLI
=======================================

Drive every subcommand against a scratch workspace: ingest records,
assign keywords, extract references, build the citation graph, produce
usage reports, run an alert batch and export BibTeX.

The same commands work from a shell:

    biblioforge ingest records.rec --store-dir store
    biblioforge citegraph --rank --store-dir store
"""

import shutil
import tempfile
from pathlib import Path

from biblioforge.cli import dispatch

CORPUS = Path(__file__).parent.parent / "tests" / "data" / "corpus"
TAXONOMY = Path(__file__).parent.parent / "tests" / "data" / "taxonomy20.tax"


def run(*argv: str) -> None:
    print(f"\n$ biblioforge {' '.join(argv)}")
    code = dispatch(list(argv))
    print(f"(exit {code})")


with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    store = str(root / "store")

    run("ingest", str(CORPUS / "records.rec"), "--store-dir", store)
    shutil.copytree(CORPUS / "ft", Path(store) / "ft")

    run("keywords", "--max", "5", "--store-dir", store, "--taxonomy", str(TAXONOMY))
    run("refextract", "--store-dir", store)
    run("citegraph", "--store-dir", store)
    run("citegraph", "--rank", "--store-dir", store)
    run("usage", "top", "--action", "view", "-k", "5",
        "--log-path", str(CORPUS / "usage.log"), "--store-dir", store)
    run("usage", "recommend", "r01", "-k", "5",
        "--log-path", str(CORPUS / "usage.log"), "--store-dir", store)
    run("alerts", "register", "--owner", "demo", "--clause", "author:contains:pepe",
        "--now", "100", "--alerts-dir", str(root / "alerts"))
    run("alerts", "run", "--now", "5000", "--store-dir", store,
        "--alerts-dir", str(root / "alerts"),
        "--notifications-dir", str(root / "notifications"))
    run("export", "bibtex", "r01", "r02", "--store-dir", store)
