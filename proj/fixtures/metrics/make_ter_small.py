# Reference TER edit counts for every pair of sequences of at most 4 tokens
# over {a, b, c}, enumerated by length then lexicographically. One digit per
# pair, hypothesis-major.
import itertools

from sacrebleu.metrics.lib_ter import translation_edit_rate

seqs = [()] + [p for n in range(1, 5) for p in itertools.product("abc", repeat=n)]
digits = []
for h in seqs:
    for r in seqs:
        edits, _ = translation_edit_rate(list(h), list(r))
        digits.append(str(int(edits)))
with open("ter_small.txt", "w") as f:
    f.write("".join(digits) + "\n")
