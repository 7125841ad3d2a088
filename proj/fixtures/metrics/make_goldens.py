"""Writes goldens.json from the reference scorer (sacrebleu 2.x)."""
import json

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF, TER

pairs = [json.loads(line) for line in open("pairs.jsonl", encoding="utf-8")]
hyps = [p["hyp"] for p in pairs]
refs = [p["ref"] for p in pairs]


def scores(h, r):
    return {
        "bleu": BLEU().corpus_score(h, [r]).score,
        "chrf_pp": CHRF(word_order=2).corpus_score(h, [r]).score,
        "ter": TER().corpus_score(h, [r]).score,
        "ter_normalized": TER(normalized=True).corpus_score(h, [r]).score,
        "ter_case_sensitive": TER(case_sensitive=True).corpus_score(h, [r]).score,
        "bleu_lowercase": BLEU(lowercase=True).corpus_score(h, [r]).score,
    }


out = {
    "scorer": "sacrebleu " + sacrebleu.__version__,
    "corpus": scores(hyps, refs),
    "pairs": {p["id"]: scores([p["hyp"]], [p["ref"]]) for p in pairs},
}
with open("goldens.json", "w", encoding="utf-8") as f:
    json.dump(out, f, indent=2, ensure_ascii=False)
    f.write("\n")
