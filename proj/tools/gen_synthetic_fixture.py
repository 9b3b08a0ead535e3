#!/usr/bin/env python3
"""Regenerates fixtures/synthetic: ~200 commits, 30 issues, known fix links.

Each fix commit message restates its issue summary, so a character n-gram
embedder ranks the true commit first. Output is deterministic.
"""
import json
import random
import sys
from pathlib import Path

T0 = 1577836800  # 2020-01-01
DAY = 86400
N_ISSUES = 30
N_COMMITS = 200

rng = random.Random(20240611)

SYLLABLES = ["ka", "ro", "mi", "tes", "val", "dor", "quin", "ze", "lu", "pha", "gri", "non",
             "tor", "bex", "sul", "yam", "cre", "dua", "fin", "hol", "jex", "wem", "oba", "vir"]

used = set()


def word():
    while True:
        w = "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 3)))
        if w not in used:
            used.add(w)
            return w


FILLER = [
    "Update build scripts", "Bump dependency versions", "Tidy up imports", "Improve logging output",
    "Refresh documentation", "Reformat sources", "Adjust CI settings", "Rename internal helpers",
    "Clean up unused code", "Add more unit tests", "Update changelog", "Polish error messages",
]
VERBS = ["crashes when", "fails to load", "returns wrong", "leaks memory in", "hangs during", "ignores"]


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    issues = []
    for i in range(N_ISSUES):
        component, thing, mode = word(), word(), word()
        verb = rng.choice(VERBS)
        summary = f"{component.capitalize()} {thing} {verb} {mode} handler"
        description = (f"The {component} module {verb} {thing} input in {mode} mode. "
                       f"Seen with {word()} enabled.")
        issues.append({"n": i + 1, "summary": summary, "description": description, "component": component})

    # Spread issue creation over ~640 days; each fix lands 1-20 days later.
    slots = sorted(rng.sample(range(5, 640), N_ISSUES))
    fix_commits = []
    for issue, day in zip(issues, slots):
        issue["create_time"] = T0 + day * DAY + rng.randint(0, DAY - 1)
        n_fixes = 2 if issue["n"] % 7 == 0 else 1
        for f in range(n_fixes):
            t = issue["create_time"] + rng.randint(1, 20) * DAY + rng.randint(0, DAY - 1)
            msg = issue["summary"]
            if issue["n"] % 4 == 0:
                msg = msg.rsplit(" ", 1)[0]  # drop the trailing word
            elif issue["n"] % 4 == 1:
                msg = "Fix: " + msg
            if issue["n"] % 3 == 0:
                msg = f"{msg} (#{issue['n']})"
            elif issue["n"] % 3 == 1:
                msg = f"SYN-{issue['n']}: {msg}"
            if f == 1:
                msg = f"{msg}\n\nFollow-up for the remaining {issue['component']} path."
            fix_commits.append({"time": t, "message": msg, "issue": issue["n"], "component": issue["component"]})

    filler = []
    for _ in range(N_COMMITS - len(fix_commits)):
        t = T0 + rng.randint(0, 700 * DAY)
        filler.append({"time": t, "message": rng.choice(FILLER), "issue": None, "component": "misc"})

    all_commits = sorted(fix_commits + filler, key=lambda c: c["time"])
    commits, links = [], []
    for idx, c in enumerate(all_commits):
        key = f"c{idx:03d}"
        path = f"src/{c['component']}.txt"
        commits.append({
            "key": key,
            "time": c["time"],
            "message": c["message"],
            "files": {path: f"revision {idx}\n{c['message']}\n"},
        })
        if c["issue"] is not None:
            links.append({"issue_id": f"SYN-{c['issue']}", "commit_key": key})

    with open(out / "commits.jsonl", "w") as fh:
        for c in commits:
            fh.write(json.dumps(c) + "\n")
    with open(out / "links.jsonl", "w") as fh:
        for l in links:
            fh.write(json.dumps(l) + "\n")
    with open(out / "issues.jsonl", "w") as fh:
        for issue in issues:
            fh.write(json.dumps({
                "issue_id": f"SYN-{issue['n']}",
                "summary": issue["summary"],
                "description": issue["description"],
                "create_time": issue["create_time"],
                "comments": [f"Reproduced on build {rng.randint(100, 999)}."],
            }) + "\n")
    config = {
        "project_name": "synthetic",
        "mode": "RDS",
        "epsilon_days": 365,
        "sample_cap": 1000,
        "split_ratio": [4, 1],
        "seed": 42,
        "embedding_provider": {"type": "stub", "dimension": 384},
        "rerank": {"enabled": True, "k": 10, "client": "echo"},
        "output_dir": "run",
    }
    with open(out / "config.json", "w") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures" / "synthetic")
