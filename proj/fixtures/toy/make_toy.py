"""Regenerates the toy five-language TSV fixture."""
import random

LANGS = ["pt-BR", "cs", "de", "fi", "ko"]
ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ou"]
HANGUL = "가나다라마바사아자차카타파하거너더러머버서어저처커터퍼허"


def make_vocab(rng, n):
    words = set()
    while len(words) < n:
        words.add("".join(rng.choice(ONSETS) + rng.choice(VOWELS) for _ in range(rng.randint(1, 3))))
    return sorted(words)


def translate(word, lang):
    if lang == "pt-BR":
        return word + "ão"
    if lang == "cs":
        return word.replace("a", "á").replace("e", "ě") + "ka"
    if lang == "de":
        return word.capitalize() + "en"
    if lang == "fi":
        return word + word[-1] + "ä"
    return "".join(HANGUL[ord(c) % len(HANGUL)] for c in word[:3])


def sentence(words, lang):
    out = " ".join(translate(w, lang) for w in words)
    return out[0].upper() + out[1:] + "."


def main():
    rng = random.Random(20240611)
    vocab = make_vocab(rng, 400)
    sources = []
    seen = set()
    while len(sources) < 171:
        words = [rng.choice(vocab) for _ in range(rng.randint(4, 10))]
        key = " ".join(words)
        if key not in seen:
            seen.add(key)
            sources.append(words)
    # near-duplicates: one word changed in a long sentence
    for base in sources[:28]:
        variant = list(base) + [rng.choice(vocab)]
        sources.append(variant)

    rows = {lang: [] for lang in LANGS}
    for words in sources:
        src = " ".join(words).capitalize() + "."
        for lang in LANGS:
            rows[lang].append((src, sentence(words, lang)))

    for lang in LANGS:
        extra = [
            ("v2.3.1", "v2.3.1"),
            ("Press <b>Save</b> to keep changes", "<b>" + sentence(["save"], lang) + "</b>"),
            ("ERROR_CODE_42 = getValue();", "ERROR_CODE_42 = getValue();"),
        ]
        rows[lang].extend(extra)
        rows[lang].append(rows[lang][3])
    rows["de"].append(("Untranslated menu entry", "Untranslated menu entry"))
    rows["fi"].append(("Only present in one export", "Vain yhdessä viennissä"))
    rows["ko"].append(("Only  present\tin one export", ""))

    for lang in LANGS:
        with open(f"en-{lang}.tsv", "w", encoding="utf-8", newline="\n") as f:
            for src, tgt in rows[lang]:
                f.write(f"{src}\t{tgt}\n".replace("\tin", " in"))


if __name__ == "__main__":
    main()
