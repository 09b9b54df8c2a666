"""Regenerates metric_pairs.jsonl: 100 hypothesis/reference pairs with
sentence BLEU and chrF from sacreBLEU 2.0.0 (default signatures).

    python3 make_metric_pairs.py > metric_pairs.jsonl
"""
import json
import random

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF

assert sacrebleu.__version__ == "2.0.0"

FIXED = [
    ("The cat sat on the mat.", "The cat sat on the mat."),
    ("the cat", "the cat"),
    ("a b c", "a b c"),
    ("completely different words here", "nothing shared at all today"),
    ("It costs $3.50, or 1,000 lira.", "It costs 3.50 dollars, or about 1,000 lira."),
    ("Tom &amp; Jerry said &quot;hi&quot;.", "Tom & Jerry said \"hi\"."),
    ("Şu ağaç, İzmir'de çok güzel.", "Bu ağaç İzmir'de çok güzel!"),
    ("Größe und Übermut: 1990-2000 war gut.", "Größe, Übermut; 1990 - 2000 war sehr gut."),
    ("Hello, world!", "Hello world"),
    ("well-known co-\nop results <skipped> today", "well-known coop results today"),
    ("x", "a much longer reference sentence than the hypothesis"),
    ("a much longer hypothesis sentence than the reference", "x"),
    ("  padded   with\tspaces  ", "padded with spaces"),
    ("UPPER case Words", "upper CASE words"),
    ("3.14 and 2,5 - 7-8", "3.14 and 2,5 7-8"),
    ("中文 句子 测试 。", "中文 句子 测试 !"),
    ("emoji 🙂 test ok", "emoji test 🙂 ok"),
    ("(brackets) [and] {braces}", "brackets and braces"),
    ("repeat repeat repeat repeat", "repeat"),
    ("one two three four five", "five four three two one"),
]


def perturb(words, rng):
    words = list(words)
    for _ in range(rng.randint(0, 4)):
        op = rng.random()
        if not words:
            break
        i = rng.randrange(len(words))
        if op < 0.3:
            del words[i]
        elif op < 0.55:
            j = rng.randrange(len(words))
            words[i], words[j] = words[j], words[i]
        elif op < 0.8:
            words[i] = rng.choice(["the", "a", "and", "it", "not", "very", ",", "."])
        else:
            words.insert(i, rng.choice(["indeed", "perhaps", "so", ";"]))
    return words


def main():
    rng = random.Random(20211)
    with open("../../data/corpus_en.txt", encoding="utf-8") as f:
        lines = [l.rstrip("\n") for l in f if len(l.split()) >= 3]
    pairs = list(FIXED)
    while len(pairs) < 100:
        ref = rng.choice(lines)
        hyp = " ".join(perturb(ref.split(), rng))
        if rng.random() < 0.3:
            hyp = hyp.capitalize()
        if hyp.strip():
            pairs.append((hyp, ref))
    bleu = BLEU()
    chrf = CHRF()
    for hyp, ref in pairs:
        print(json.dumps({
            "hypothesis": hyp,
            "reference": ref,
            "bleu": bleu.sentence_score(hyp, [ref]).score,
            "chrf": chrf.sentence_score(hyp, [ref]).score,
        }, ensure_ascii=False))


if __name__ == "__main__":
    main()
