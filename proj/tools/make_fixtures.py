#!/usr/bin/env python3
"""Regenerates the bundled replay fixtures under fixtures/ and data/.

The engine addresses connector fixtures by an FNV-1a hash of the canonical
request key, so this script mirrors the C++ canonicalization exactly. Run it
from the repository root after changing any of the scenario definitions
below; the output is deterministic, so reruns produce identical bytes.
"""

import json
import os
import re
from datetime import datetime, timedelta, timezone

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def canon(param: str) -> str:
    return re.sub(r"\s+", " ", param.strip()).lower()


def iso(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def ts(s: str) -> datetime:
    return datetime.strptime(s, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def record_key(api: str, params) -> str:
    parts = [canon(api)]
    for p in params:
        p = p.strip()
        # Timestamps keep their canonical ISO form instead of being folded.
        if re.fullmatch(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z", p):
            parts.append(p)
        else:
            parts.append(canon(p))
    return "|".join(parts)


def fnv1a64(s: str) -> str:
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def write_json(path: str, obj) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)
        f.write("\n")


class FixtureDir:
    def __init__(self, rel):
        self.dir = os.path.join(ROOT, rel)
        self.index = {}

    def add(self, api: str, key: str, recorded_at: str, payload) -> None:
        fname = fnv1a64(key) + ".json"
        write_json(os.path.join(self.dir, fname),
                   {"key": key, "recorded_at": recorded_at, "api": canon(api),
                    "payload": payload})
        self.index[key] = fname

    def finish(self) -> None:
        entries = [{"key": k, "file": f} for k, f in sorted(self.index.items())]
        write_json(os.path.join(self.dir, "index.json"), {"entries": entries})


def news_items(items):
    out = []
    for content, source, url, published in items:
        item = {"title": content, "content": content,
                "source_name": source, "url": url}
        if published:
            item["published_at"] = published
        out.append(item)
    return {"items": out}


def bars(day_values):
    out = []
    for day, (o, h, l, c, v) in day_values:
        out.append({"t": day, "o": o, "h": h, "l": l, "c": c, "v": v})
    return {"bars": out}


# ---------------------------------------------------------------------------
# Demo scenario: one `ask` run, --now 2024-10-15T12:00:00Z.
# ---------------------------------------------------------------------------

DEMO_NOW = "2024-10-15T12:00:00Z"
DEMO_QUERY = "How did NVDA move after last Friday's CPI print?"

DEMO_PLAN = {
    "root": "n001",
    "nodes": [
        {"id": "n001", "query": DEMO_QUERY},
        {"id": "n002", "query": "NVDA 2024-10-08..2024-10-15 1d", "api": "Finance"},
        {"id": "n003", "query": "NVDA stock reaction CPI", "api": "News"},
        {"id": "n004", "query": "semiconductor sector reaction CPI October 2024",
         "api": "WebSearch"},
    ],
    "edges": [["n001", "n002"], ["n001", "n003"], ["n003", "n004"]],
}

DEMO_REWRITE = {
    "decisions": [
        {"child_id": "n004", "action": "replace",
         "query": "semiconductor stocks reaction to September CPI data October 10 2024"}
    ]
}

DEMO_NARRATIVE = """## NVDA after the CPI print

The hotter-than-expected September CPI release on October 10 initially knocked semiconductor names lower, but NVDA recovered through the following sessions [2]. Desk commentary attributed the bounce to resilient AI-datacenter demand [1], while sector breadth stayed mixed into Tuesday [3].

Across October 8-14 the stock ranged roughly 121-135 and closed the window near its highs; the candlestick series is attached as chart data.
"""


def make_demo():
    fx = FixtureDir("fixtures/demo")
    now = ts(DEMO_NOW)
    window_from, window_to = iso(now - timedelta(days=7)), iso(now)

    fx.add("news",
           record_key("News", ["NVDA stock reaction CPI", window_from, window_to]),
           DEMO_NOW,
           news_items([
               ("NVDA extends rebound as AI datacenter orders stay firm",
                "MarketWatch Test Feed", "https://news.example.test/nvda-rebound",
                "2024-10-14T18:00:00Z"),
               ("Chipmakers slip after September CPI surprises to the upside",
                "Reuters Test Feed", "https://news.example.test/cpi-chips",
                "2024-10-13T09:00:00Z"),
               ("NVDA options volume spikes into CPI week",
                "Bloomberg Test Feed", "https://news.example.test/nvda-options",
                "2024-10-12T22:00:00Z"),
           ]))

    for q in ["semiconductor stocks reaction to September CPI data October 10 2024",
              "semiconductor sector reaction CPI October 2024"]:
        fx.add("websearch", record_key("WebSearch", [q]), DEMO_NOW,
               news_items([
                   ("SOX index recovers half of its post-CPI drawdown",
                    "Sector Wrap", "https://web.example.test/sox-wrap",
                    "2024-10-14T10:00:00Z"),
                   ("Analysts see CPI-driven chip weakness as transitory",
                    "Street Notes", "https://web.example.test/street-notes",
                    None),
               ]))

    fx.add("finance",
           record_key("Finance", ["NVDA", "2024-10-08T00:00:00Z",
                                  "2024-10-15T00:00:00Z", "1d"]),
           DEMO_NOW,
           bars([
               ("2024-10-08T00:00:00Z", (124.10, 127.50, 121.80, 126.90, 310000000)),
               ("2024-10-09T00:00:00Z", (127.00, 129.40, 125.30, 128.75, 280000000)),
               ("2024-10-10T00:00:00Z", (128.20, 130.10, 122.40, 123.90, 405000000)),
               ("2024-10-11T00:00:00Z", (124.50, 131.20, 124.10, 130.60, 365000000)),
               ("2024-10-14T00:00:00Z", (131.00, 135.40, 129.80, 134.80, 290000000)),
           ]))
    fx.finish()

    write_json(os.path.join(ROOT, "fixtures/demo/script.json"), {
        "entries": [
            {"role": "Planner", "response": json.dumps(DEMO_PLAN)},
            {"role": "Rewriter", "response": "KEEP"},
            {"role": "Rewriter", "response": json.dumps(DEMO_REWRITE)},
            {"role": "Generator", "response": DEMO_NARRATIVE},
        ]
    })


# ---------------------------------------------------------------------------
# Benchmark fixture set: 20 questions, hand-scored key = 15 correct,
# 3 wrong, 2 unparsed -> 75.00 ± 9.68.
# ---------------------------------------------------------------------------

CATEGORIES = ["stock_market", "rate_changes", "monetary_policy",
              "industry_developments"]

QUESTIONS = [
    # (stem, choices, answer)
    ("Which direction did the regional bank index move after the June stress-test results?",
     ["Up", "Down", "Flat", "Trading halted"], "A"),
    ("What did the central bank do to its policy rate at the mid-June meeting?",
     ["Raised it", "Cut it", "Held it", "Abolished it"], "C"),
    ("Which sector led gains the week AI capex guidance was raised?",
     ["Utilities", "Semiconductors", "Airlines", "Retail"], "B"),
    ("How did the 10-year yield react to the July inflation print?",
     ["Rose", "Fell", "Unchanged", "Market closed"], "B"),
    ("What happened to ACME shares after its July earnings beat?",
     ["Fell 5%", "Rose 8%", "Flat", "Delisted"], "B"),
    ("Which commodity rallied on the July supply disruption headlines?",
     ["Crude oil", "Wheat", "Copper", "Gold"], "A"),
    ("What was the stated reason for the August policy pause?",
     ["Cooling inflation", "Currency peg", "Election rules", "Bank failures"], "A"),
    ("Which automaker announced the largest EV price cut in August?",
     ["Maker A", "Maker B", "Maker C", "Maker D"], "D"),
    ("How did small caps perform relative to large caps in late August?",
     ["Outperformed", "Underperformed", "Matched", "Not tracked"], "A"),
    ("What did the August payrolls revision imply for rate expectations?",
     ["More hikes", "Earlier cuts", "No change", "Emergency hike"], "B"),
    ("Which exchange extended trading hours in September?",
     ["Exchange W", "Exchange X", "Exchange Y", "Exchange Z"], "C"),
    ("What drove the September rally in shipping rates?",
     ["Canal congestion", "Fuel subsidies", "New tariffs", "Fleet growth"], "A"),
    ("How large was the September policy rate cut?",
     ["25 bps", "50 bps", "75 bps", "No cut"], "B"),
    ("Which index entered correction territory mid-September?",
     ["Index P", "Index Q", "Index R", "Index S"], "D"),
    ("What did the chip subsidy announcement do to fab equipment names?",
     ["Lifted them", "Sank them", "No effect", "Halted them"], "A"),
    ("Which currency weakened most after the September intervention talk?",
     ["Currency A", "Currency B", "Currency C", "Currency D"], "C"),
    ("What happened to mortgage rates in the first October week?",
     ["Ticked up", "Ticked down", "Flat", "Unquoted"], "B"),
    ("Which retailer guided holiday sales above consensus in October?",
     ["Retailer K", "Retailer L", "Retailer M", "Retailer N"], "B"),
    ("How did energy stocks react to the October inventory draw?",
     ["Rallied", "Sold off", "Flat", "Suspended"], "A"),
    ("What did the October bank earnings say about net interest margins?",
     ["Expanding", "Compressing", "Stable", "Not reported"], "C"),
]

WRONG = {3, 9, 17}      # zero-based indexes answered with a wrong letter
UNPARSED = {7, 14}      # zero-based indexes with no extractable letter


def wrong_letter(right: str) -> str:
    return "A" if right != "A" else "B"


def make_bench():
    fx = FixtureDir("fixtures/bench")
    entries = []
    lines = []
    start = ts("2024-06-05T08:00:00Z")
    for i, (stem, choices, answer) in enumerate(QUESTIONS):
        when = start + timedelta(days=6 * i, hours=i % 5)
        qid = f"q{i + 1:02d}"
        labeled = dict(zip("ABCD", choices))
        lines.append({"id": qid, "timestamp": iso(when), "stem": stem,
                      "choices": labeled, "answer_key": answer,
                      "category": CATEGORIES[i % 4]})

        # evaluate() builds the user query as stem + one line per choice; the
        # planner's root node carries that query and hits the news connector.
        user_query = stem + "\n" + "".join(
            f"{label}) {text}\n" for label, text in labeled.items())
        plan = {"root": "n001",
                "nodes": [{"id": "n001", "query": "placeholder", "api": "News"}],
                "edges": []}
        entries.append({"role": "Planner", "response": json.dumps(plan)})

        if i in UNPARSED:
            reply = "The evidence is inconclusive; refusing to guess."
        elif i in WRONG:
            reply = f"Weighing the latest items [1]. ANSWER: {wrong_letter(answer)}"
        else:
            reply = f"The freshest evidence [1] settles it. ANSWER: {answer}"
        entries.append({"role": "Answerer", "response": reply})

        window_from, window_to = iso(when - timedelta(days=7)), iso(when)
        fx.add("news", record_key("News", [user_query, window_from, window_to]),
               iso(when),
               news_items([
                   (f"Desk summary {qid}: event coverage consistent with option "
                    f"{answer}", "Fixture Wire",
                    f"https://news.example.test/{qid}",
                    iso(when - timedelta(hours=20))),
                   (f"Background piece {qid} from earlier in the week",
                    "Fixture Wire", f"https://news.example.test/{qid}-bg",
                    iso(when - timedelta(hours=60))),
               ]))
    fx.finish()

    with open(os.path.join(ROOT, "data/questions_20.jsonl"), "w",
              encoding="utf-8") as f:
        for line in lines:
            f.write(json.dumps(line, ensure_ascii=False) + "\n")
    write_json(os.path.join(ROOT, "fixtures/bench/script.json"),
               {"entries": entries})


# ---------------------------------------------------------------------------
# Ablation smoke set: one question whose plan has a rewritable child, so
# rewriter on/off produces visibly different traces and connector keys.
# ---------------------------------------------------------------------------

ABL_TS = "2024-09-20T08:00:00Z"
ABL_STEM = "What did the September FOMC decision do to the policy rate?"
ABL_CHOICES = {"A": "Raised 25 bps", "B": "Cut 50 bps", "C": "Held steady",
               "D": "Moved to negative"}
ABL_ANSWER = "B"


def make_bench_ablation():
    fx = FixtureDir("fixtures/bench_ablation")
    when = ts(ABL_TS)
    window_from, window_to = iso(when - timedelta(days=7)), iso(when)

    plan = {"root": "n001",
            "nodes": [{"id": "n001", "query": "placeholder"},
                      {"id": "n002", "query": "fed rate decision coverage",
                       "api": "News"}],
            "edges": [["n001", "n002"]]}
    rewrite = {"decisions": [{"child_id": "n002", "action": "replace",
                              "query": "fed rate cut coverage post-FOMC"}]}
    write_json(os.path.join(ROOT, "fixtures/bench_ablation/script.json"), {
        "entries": [
            {"role": "Planner", "response": json.dumps(plan)},
            {"role": "Rewriter", "response": json.dumps(rewrite)},
            {"role": "Answerer",
             "response": f"Fresh coverage [1] is decisive. ANSWER: {ABL_ANSWER}"},
        ]
    })

    for q in ["fed rate decision coverage", "fed rate cut coverage post-FOMC"]:
        fx.add("news", record_key("News", [q, window_from, window_to]), iso(when),
               news_items([
                   ("FOMC surprises with a half-point cut", "Fixture Wire",
                    "https://news.example.test/fomc", iso(when - timedelta(hours=18))),
               ]))
    fx.finish()

    with open(os.path.join(ROOT, "data/questions_ablation.jsonl"), "w",
              encoding="utf-8") as f:
        f.write(json.dumps({"id": "abl01", "timestamp": ABL_TS, "stem": ABL_STEM,
                            "choices": ABL_CHOICES, "answer_key": ABL_ANSWER,
                            "category": "monetary_policy"},
                           ensure_ascii=False) + "\n")


def make_configs():
    write_json(os.path.join(ROOT, "configs/demo.json"), {
        "llm": {"mode": "scripted", "script_path": "../fixtures/demo/script.json"},
        "fixtures": {"dir": "../fixtures/demo", "mode": "replay"},
        "prompts_dir": "../prompts",
        "out_dir": "../out/demo",
        "temporal": {"window_hours": 72, "numerator_hours": 24,
                     "min_delta_hours": 1},
        "news_window_days": 7,
    })
    write_json(os.path.join(ROOT, "configs/bench.json"), {
        "llm": {"mode": "scripted", "script_path": "../fixtures/bench/script.json"},
        "fixtures": {"dir": "../fixtures/bench", "mode": "replay"},
        "prompts_dir": "../prompts",
        "out_dir": "../out/bench",
    })
    write_json(os.path.join(ROOT, "configs/bench_ablation.json"), {
        "llm": {"mode": "scripted",
                "script_path": "../fixtures/bench_ablation/script.json"},
        "fixtures": {"dir": "../fixtures/bench_ablation", "mode": "replay"},
        "prompts_dir": "../prompts",
        "out_dir": "../out/bench_ablation",
    })
    # Live-mode example, secrets via env vars only.
    write_json(os.path.join(ROOT, "configs/live.example.json"), {
        "llm": {"mode": "live",
                "default": {"endpoint_url": "https://api.openai.example/v1/chat/completions",
                            "model_name": "gpt-4o",
                            "api_key_env": "FINSEARCH_LLM_KEY"}},
        "connectors": {
            "news": {"endpoint_url": "https://news.provider.example/v1/search",
                     "api_key_env": "FINSEARCH_NEWS_KEY"},
            "web": {"endpoint_url": "https://web.provider.example/v1/search",
                    "api_key_env": "FINSEARCH_WEB_KEY"},
            "finance": {"endpoint_url": "https://finance.provider.example/v1/ohlc",
                        "api_key_env": "FINSEARCH_FINANCE_KEY"},
        },
        "fixtures": {"dir": "../fixtures/recorded", "mode": "record"},
        "prompts_dir": "../prompts",
        "out_dir": "../out/live",
    })


if __name__ == "__main__":
    make_demo()
    make_bench()
    make_bench_ablation()
    make_configs()
    print("fixtures, data and configs regenerated")
