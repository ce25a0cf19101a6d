"""Regenerate the bundled verb/noun/adjective lists.

Frequency order comes from wordfreq's English table, part of speech from
lemminflect's inflection lexicon. Both are read straight out of their wheel
files so neither package needs to be installed:

    pip download wordfreq==3.1.1 lemminflect==0.2.3 --no-deps -d wheels/
    python tools/build_lexicon.py wheels/ src/affordance/data/
"""

import gzip
import sys
import zipfile
from pathlib import Path

from _msgpack_lite import unpack

N_VERBS = 1500
N_NOUNS = 8000
N_ADJ = 4000

# function words that the POS lexicon also lists as nouns/adjectives
STOP = set("""
a about above after again against all am an and any are as at be because been before being below
between both but by can could did do does doing down during each few for from further had has have
having he her here hers herself him himself his how i if in into is it its itself just me more most
my myself no nor not now of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there these they this those
through to too under until up very was we were what when where which while who whom why will with
would you your yours yourself yourselves one two three four five six seven eight nine ten also
may might must shall upon yet s t re ll ve d m o y us
""".split())


def main(wheel_dir, out_dir):
    wheel_dir, out_dir = Path(wheel_dir), Path(out_dir)
    wf = zipfile.ZipFile(next(wheel_dir.glob("wordfreq-*.whl")))
    buckets, _ = unpack(gzip.decompress(wf.read("wordfreq/data/large_en.msgpack.gz")))
    rank, freq = {}, {}
    for cb, bucket in enumerate(buckets[1:]):
        for w in bucket:
            rank.setdefault(w, len(rank))
            freq.setdefault(w, 10 ** (-cb / 100))

    lm = zipfile.ZipFile(next(wheel_dir.glob("lemminflect-*.whl")))
    rows = gzip.decompress(lm.read("lemminflect/resources/infl_lu.csv.gz")).decode().splitlines()
    pos = {"verb": {}, "noun": {}, "adj": {}}
    for row in rows:
        lemma, tag, *forms = row.split(",")
        if tag in pos and lemma.isalpha() and lemma.islower() and len(lemma) > 1:
            pos[tag][lemma] = {f for part in forms for f in part.split("/") if f and f != lemma}

    def ratio(lemma, forms):
        # how often the inflected forms show up relative to the bare lemma
        return sum(freq.get(f, 0.0) for f in forms) / freq.get(lemma, 1e-12)

    verb_like = {w for w, fs in pos["verb"].items()
                 if ratio(w, {f for f in fs if f.endswith(("ed", "ing")) or not f.endswith("s")}) >= 0.15}
    strong_verb = {w for w, fs in pos["verb"].items()
                   if ratio(w, {f for f in fs if f.endswith(("ed", "ing")) or not f.endswith("s")}) >= 0.4}
    adj_like = {w for w, fs in pos["adj"].items() if fs and ratio(w, fs) >= 0.05}

    def ordered(words, n, drop=()):
        ws = [w for w in words if w in rank and w not in STOP and w not in drop]
        return sorted(ws, key=rank.__getitem__)[:n]

    verbs = ordered(verb_like, N_VERBS)
    nouns = ordered(pos["noun"], N_NOUNS, drop=(verb_like & strong_verb) | adj_like)
    adjs = ordered(pos["adj"], N_ADJ)
    header = "# generated by tools/build_lexicon.py; descending corpus frequency\n"
    for name, words in (("verbs", verbs), ("nouns", nouns), ("adjectives", adjs)):
        (out_dir / f"{name}.txt").write_text(header + "\n".join(words) + "\n", encoding="utf-8")
        print(name, len(words), words[:15])


if __name__ == "__main__":
    main(*sys.argv[1:3])
