#!/usr/bin/env python3
"""Regenerate the bundled corpus fixtures under src/spellsearch/data/.

The fixtures are synthetic but statistically opinionated: heavy deletion
mass, positions skewed toward word endings, vowel-biased deletions, and a
mix of keyboard-local and non-local substitutions, so that statistics
learned from them are clearly distinguishable from uniform noise.
"""

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "spellsearch" / "data"

WORDS = """
about above actual address advance already always amount analysis answer
application approach around attach available balance because before better
between board browser budget business button cancel capture careful change
channel charge close cloud common company complete connect contact content
control correct country create current custom customer daily default delete
delivery design detail device different direct display document double
download driver editor email enable engine enough example explore export
feature field filter finally finance folder follow format forward found
function general green group handle happen hardware header health helpful
history holiday however image import important include index input inside
install instance integrate interest internal invoice island issue itself
journey keyboard kitchen language laptop large launch layout learning letter
level library license limit listen little local location machine manage
manager manual market material matter measure meeting member memory message
method middle minute mobile module moment monitor month morning mountain
nature network never night normal notice number object office online only
option order other output outside overview package page paper partner
password payment people performance period person phone picture place
planning platform player please point policy position possible power
practice present pretty print private problem process product profile
program project provide public purchase purpose quality question quick
radio random range reason receive recent record reduce refresh region
register regular release remember remote remove report request require
research resource response result return review right school screen search
season second section secure select sentence server service setting setup
share should signal simple single social software solution source special
spring stable standard start status storage story stream street strong
student summary support switch system table target teacher template test
thanks theme thing think thought through ticket timer title today together
token tomorrow total track traffic training transfer travel trouble update
upgrade upload useful user value version video viewer visual volume wallet
weather website weekly welcome window winter without wonder worker workflow
workshop world would write yellow yesterday
""".split()

VOWELS = set("aeiou")

QWERTY_NEIGHBORS = {
    "a": "qwsz", "b": "vghn", "c": "xdfv", "d": "serfcx", "e": "wsdr",
    "f": "drtgvc", "g": "ftyhbv", "h": "gyujnb", "i": "ujko", "j": "huikmn",
    "k": "jiolm", "l": "kop", "m": "njk", "n": "bhjm", "o": "iklp",
    "p": "ol", "q": "wa", "r": "edft", "s": "awedxz", "t": "rfgy",
    "u": "yhji", "v": "cfgb", "w": "qase", "x": "zsdc", "y": "tghu",
    "z": "asx",
}

PHONETIC = {
    "a": "e", "e": "a", "i": "e", "o": "a", "u": "o",
    "c": "k", "k": "c", "s": "z", "z": "s", "f": "v", "v": "f",
}

LETTERS = "abcdefghijklmnopqrstuvwxyz"


def pick_position(word, rng, power):
    # u**power with power < 1 skews the density toward late positions
    r = rng.random() ** power
    return min(int(r * len(word)), len(word) - 1)


def make_typo(word, rng, profile):
    kind = rng.choices(
        ["deletion", "insertion", "replication", "substitution", "transposition"],
        weights=profile["weights"],
    )[0]
    for _ in range(50):
        if kind == "deletion":
            vowel_idx = [i for i, ch in enumerate(word) if ch in VOWELS]
            if vowel_idx and rng.random() < 0.6:
                i = rng.choice(vowel_idx[len(vowel_idx) // 2:] or vowel_idx)
            else:
                i = pick_position(word, rng, profile["pos_power"])
            out = word[:i] + word[i + 1:]
        elif kind == "insertion":
            i = pick_position(word, rng, profile["pos_power"])
            ch = rng.choice(QWERTY_NEIGHBORS.get(word[i], LETTERS))
            out = word[:i + 1] + ch + word[i + 1:]
        elif kind == "replication":
            i = pick_position(word, rng, profile["pos_power"])
            out = word[:i + 1] + word[i] + word[i + 1:]
        elif kind == "substitution":
            i = pick_position(word, rng, profile["pos_power"])
            u = rng.random()
            if u < 0.5:
                ch = rng.choice(QWERTY_NEIGHBORS.get(word[i], LETTERS))
            elif u < 0.85 and word[i] in PHONETIC:
                ch = PHONETIC[word[i]]
            else:
                ch = rng.choice(LETTERS)
            out = word[:i] + ch + word[i + 1:]
        else:
            i = pick_position(word[:-1], rng, profile["pos_power"])
            out = word[:i] + word[i + 1] + word[i] + word[i + 2:]
        if out != word:
            return out
    return None


GITHUB_PROFILE = {
    "weights": [0.46, 0.10, 0.09, 0.22, 0.13],
    "pos_power": 0.45,
}
TWITTER_PROFILE = {
    "weights": [0.32, 0.15, 0.11, 0.26, 0.16],
    "pos_power": 0.7,
}

CONTEXTS = [
    "fix typo in the {} section",
    "update {} handling",
    "remove unused {} flag",
    "document the {} option",
    "rename {} helper",
]


def write_github(path, rng):
    lines = []
    for n in range(600):
        word = rng.choice(WORDS)
        typo = make_typo(word, rng, GITHUB_PROFILE)
        if typo is None:
            continue
        ctx = rng.choice(CONTEXTS)
        record = {
            "repo": f"fixture/repo-{n % 23}",
            "edits": [
                {
                    "src": {"text": ctx.format(typo)},
                    "tgt": {"text": ctx.format(word)},
                    "is_typo": True,
                    "prob_typo": round(rng.uniform(0.7, 0.99), 3),
                }
            ],
        }
        lines.append(json.dumps(record, sort_keys=True))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_twitter(path, rng):
    lines = []
    for _ in range(350):
        word = rng.choice(WORDS)
        typo = make_typo(word, rng, TWITTER_PROFILE)
        if typo is None:
            continue
        lines.append(f"{typo}\t{word}\t{rng.randint(100000, 999999)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_english(path, rng):
    # Zipf-flavored fake frequencies over the shared word list plus glue words
    glue = """the a an and or of to in on for with from by at as is are was
    were be been has have had do does did will can could should would may
    might must not no yes this that these those it its his her their our""".split()
    vocab = sorted(set(WORDS) | set(glue))
    lines = []
    for rank, word in enumerate(sorted(vocab, key=lambda w: (rng.random(),))):
        freq = max(1, int(120000 / (rank + 3)))
        lines.append((word, freq))
    lines.sort()
    path.write_text(
        "\n".join(f"{w}\t{f}" for w, f in lines) + "\n", encoding="utf-8"
    )


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    rng = random.Random(991)
    write_github(DATA / "github_fixture.jsonl", rng)
    write_twitter(DATA / "twitter_fixture.tsv", rng)
    write_english(DATA / "english_words.tsv", rng)
    for f in sorted(DATA.iterdir()):
        print(f.name, f.stat().st_size, "bytes")


if __name__ == "__main__":
    main()
