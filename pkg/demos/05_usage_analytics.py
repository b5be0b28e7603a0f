"""
Usage analytics from access logs
================================

Parse the four-column event log and produce most-viewed, most-downloaded
and people-who-viewed-this-also-viewed reports.
"""

from biblioforge import co_view_recommend, top_k
from biblioforge.usage import events_from_lines

LOG = """\
1000\tann\tpaper-a\tview
1005\tann\tpaper-b\tview
1010\tbob\tpaper-a\tview
1015\tbob\tpaper-b\tview
1020\tbob\tpaper-a\tdownload
1025\tcaz\tpaper-a\tview
1030\tcaz\tpaper-c\tview
1040\tdee\tpaper-b\tview
1050\tdee\tpaper-b\tview
9999\tbad line that will be skipped
1060\teve\tpaper-c\tdownload
"""

events, skipped = events_from_lines(LOG.splitlines())
print(f"parsed {len(events)} events ({skipped} malformed line skipped)")

print("\nmost viewed:")
for record_id, count in top_k(events, "view", k=3):
    print(f"  {record_id}  {count}")

print("\nmost downloaded:")
for record_id, count in top_k(events, "download", k=3):
    print(f"  {record_id}  {count}")

# Windows are inclusive on both bounds.
early = top_k(events, "view", k=3, time_window=(1000, 1015))
print("\nmost viewed in [1000, 1015]:", early)

# Recommendation strength counts distinct co-viewing visitors, so one
# visitor refreshing a page many times cannot inflate it.
print("\npeople who viewed paper-a also viewed:")
for record_id, strength in co_view_recommend(events, "paper-a", k=5):
    print(f"  {record_id}  strength {strength}")
