#!/usr/bin/env python3
# Copyright 2026 The ClaimLens Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the bundled desk-scale fixtures.

Writes claims.csv (200 debate-style sentences in the ClaimBuster column
layout), factchecks.jsonl (50 fact-check records), gazetteer.tsv,
lexicon.json and vectors.txt (a small word2vec text file). Output is fully
determined by the fixed seed below.
"""

import csv
import json
import math
import os
import random
import re

SEED = 20240611
HERE = os.path.dirname(os.path.abspath(__file__))

SPEAKERS = [
    ("Barack Obama", "President", "Democratic"),
    ("Mitt Romney", "Governor", "Republican"),
    ("Hillary Clinton", "Secretary", "Democratic"),
    ("Donald Trump", "Businessman", "Republican"),
    ("John McCain", "Senator", "Republican"),
    ("Joe Biden", "Vice President", "Democratic"),
    ("Jim Lehrer", "Moderator", ""),
]

# surface form, entity id, wiki category
ENTITIES = [
    ("Medicare", "dbr:Medicare", "Health care in the United States"),
    ("Social Security", "dbr:Social_Security", "Social programs"),
    ("Iran", "dbr:Iran", "Middle East"),
    ("China", "dbr:China", "East Asia"),
    ("Afghanistan", "dbr:Afghanistan", "Wars involving the United States"),
    ("Iraq", "dbr:Iraq", "Wars involving the United States"),
    ("Russia", "dbr:Russia", "Eastern Europe"),
    ("Mexico", "dbr:Mexico", "North America"),
    ("Wall Street", "dbr:Wall_Street", "Finance"),
    ("Ohio", "dbr:Ohio", "States of the United States"),
    ("Florida", "dbr:Florida", "States of the United States"),
    ("Texas", "dbr:Texas", "States of the United States"),
    ("Michigan", "dbr:Michigan", "States of the United States"),
    ("health care", "dbr:Health_care", "Health care in the United States"),
    ("unemployment", "dbr:Unemployment", "Labor economics"),
    ("the deficit", "dbr:Government_budget_balance", "Public finance"),
    ("taxes", "dbr:Tax", "Public finance"),
    ("oil", "dbr:Petroleum", "Energy"),
    ("coal", "dbr:Coal", "Energy"),
    ("education", "dbr:Education", "Education policy"),
]
TOPICS = ["health care", "taxes", "the deficit", "education", "unemployment",
          "oil", "coal", "Medicare", "Social Security"]
COUNTRIES = ["Iran", "China", "Afghanistan", "Iraq", "Russia", "Mexico"]
STATES = ["Ohio", "Florida", "Texas", "Michigan"]
GROUPS = ["working families", "small businesses", "our veterans", "the middle class",
          "seniors", "young people"]
YEARS = ["2000", "2004", "2008", "2009", "2010"]

CFS = [
    "We have lost {n} thousand manufacturing jobs in {state} since {year}.",
    "{country} has increased its military spending by {n} percent over the last decade.",
    "The plan cuts {program} by {n} billion dollars over ten years.",
    "Unemployment in {state} is at {n} percent right now.",
    "The deficit has grown to {n} trillion dollars under this administration.",
    "{n} million Americans have no health insurance today.",
    "My opponent voted {n} times to raise {tax} on the middle class.",
    "We import {n} percent of our oil from {country}.",
    "Gas prices have doubled since {year}.",
    "{country} holds more than {n} billion dollars of our debt.",
]
UFS = [
    "I was in {state} last {day}.",
    "My father worked in a factory in {state} for many years.",
    "I met with a group of teachers in {state} this morning.",
    "We have been married for {n} years.",
    "I spent the weekend talking with voters in {state}.",
    "My grandmother lived with us when I was growing up.",
]
NFS = [
    "I think {topic} is the most important issue facing this country.",
    "Thank you very much for having us here tonight.",
    "We need to get {topic} right for our children.",
    "That is simply not what I said, and you know it.",
    "Let me tell you what I believe about {topic}.",
    "What are you going to do about {topic}?",
    "The American people deserve better than this kind of politics.",
    "I will fight for {group} every single day.",
    "We cannot let {country} dictate our foreign policy.",
    "I have a different vision for this country.",
    "Let me finish my answer, please.",
    "We are going to bring back prosperity to {state}.",
    "I respect my opponent but we disagree on {topic}.",
    "This election is about the future of {group}.",
    "Our approach to {country} has to be strong and clear.",
    "Nobody in this room wants to see {topic} get worse.",
    "I believe in a strong America and a strong economy.",
    "You have to ask yourself whether you are better off.",
]
DAYS = ["week", "month", "Tuesday", "Friday"]
OPENERS = ["", "Well, ", "Look, ", "Frankly, ", "And ", "Now, "]


def fill(template, rng):
    return template.format(
        n=rng.choice([2, 3, 4, 5, 6, 7, 8, 9, 12, 15, 20, 23, 40, 47, 300, 716]),
        state=rng.choice(STATES), country=rng.choice(COUNTRIES),
        year=rng.choice(YEARS), topic=rng.choice(TOPICS),
        group=rng.choice(GROUPS), day=rng.choice(DAYS),
        program=rng.choice(["Medicare", "Social Security", "education"]),
        tax=rng.choice(["taxes", "the gas tax", "income taxes"]))


def write_claims(rng):
    labels = [-1] * 142 + [0] * 12 + [1] * 46
    rng.shuffle(labels)
    rows = []
    seen = set()
    for i, code in enumerate(labels):
        pool = {-1: NFS, 0: UFS, 1: CFS}[code]
        while True:
            text = fill(rng.choice(pool), rng)
            opener = rng.choice(OPENERS)
            if opener and not text.startswith("I "):
                text = opener + text[0].lower() + text[1:]
            elif opener:
                text = opener + text
            if text not in seen:
                seen.add(text)
                break
        speaker, title, party = rng.choice(SPEAKERS)
        if i % 17 == 5:  # a few rows without metadata
            title, party = "", ""
        rows.append([str(30000 + i), text, speaker, title, party,
                     "debate%d" % (1 + i // 50), str(code)])
    with open(os.path.join(HERE, "claims.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["Sentence_id", "Text", "Speaker", "Speaker_title",
                    "Speaker_party", "File_id", "Verdict"])
        w.writerows(rows)
    return [r[1] for r in rows]


def write_factchecks(rng):
    authors = ["Angie Holan", "Louis Jacobson", "Glenn Kessler", "Lori Robertson"]
    verdicts = ["TRUE", "FALSE", "MIXTURE", "OTHER"]
    with open(os.path.join(HERE, "factchecks.jsonl"), "w") as f:
        for i in range(50):
            main = ENTITIES[i % len(ENTITIES)]
            other = ENTITIES[(i * 7 + 3) % len(ENTITIES)]
            claim = fill(rng.choice(CFS), rng)
            claim = "%s %s" % (claim, "It mentions %s and %s." % (main[0], other[0]))
            record = {
                "id": "fc-%03d" % i,
                "claim_text": claim,
                "normalized_label": verdicts[rng.randrange(4)],
                "debunk_links": ["https://factcheck.example.org/%03d" % i],
                "review_title": "Checking a claim about %s" % main[0],
                "review_body": "The statement about %s and %s overstates the record."
                               % (main[0], other[0]),
                "references": ["https://data.example.org/%s" % main[1].split(":")[1]],
                "claim_entities": [main[1].split(":")[1].replace("_", " ")],
                "review_entities": [other[1].split(":")[1].replace("_", " ")],
                "wiki_categories": sorted({main[2], other[2]}),
                "review_author": authors[i % len(authors)],
                "publication_date": "2012-%02d-%02d" % (1 + i % 12, 1 + i % 28),
                "language": "en",
            }
            f.write(json.dumps(record, sort_keys=True) + "\n")


def write_gazetteer():
    with open(os.path.join(HERE, "gazetteer.tsv"), "w") as f:
        f.write("# surface\tentity\n")
        for surface, entity, _ in ENTITIES:
            f.write("%s\t%s\n" % (surface.lower(), entity))


def write_lexicon():
    lexicon = {
        "posemo": ["good", "great", "better", "best", "strong", "prosperity", "respect",
                   "thank", "deserve", "love*"],
        "negemo": ["worse", "lost", "cut*", "fail*", "wrong", "crisis", "debt", "cannot"],
        "number": ["one", "two", "three", "ten", "thousand", "million", "billion",
                   "trillion", "percent", "doubled"],
        "certain": ["always", "never", "every", "simply", "clear", "nobody", "all"],
        "tentat": ["think", "believe", "maybe", "perhaps", "whether"],
        "we": ["we", "our", "us", "ours"],
        "you": ["you", "your", "yourself"],
        "money": ["dollars", "tax*", "budget", "debt", "deficit", "spending", "prices"],
        "work": ["jobs", "job", "factory", "worked", "unemployment", "businesses"],
        "health": ["health", "medicare", "insurance"],
    }
    with open(os.path.join(HERE, "lexicon.json"), "w") as f:
        json.dump(lexicon, f, indent=2, sort_keys=True)
        f.write("\n")


def write_vectors(texts, rng):
    # Tokens of the same topical group share a direction, so the file has
    # some structure without claiming to be a trained model.
    dim = 24
    tokens = sorted({t for text in texts for t in re.findall(r"[a-z0-9]+", text.lower())})
    groups = {}
    centers = [[rng.gauss(0, 1) for _ in range(dim)] for _ in range(6)]
    with open(os.path.join(HERE, "vectors.txt"), "w") as f:
        f.write("%d %d\n" % (len(tokens), dim))
        for t in tokens:
            g = groups.setdefault(t, sum(map(ord, t)) % len(centers))
            v = [c + 0.5 * rng.gauss(0, 1) for c in centers[g]]
            norm = math.sqrt(sum(x * x for x in v))
            f.write(t + " " + " ".join("%.6f" % (x / norm) for x in v) + "\n")


def main():
    rng = random.Random(SEED)
    texts = write_claims(rng)
    write_factchecks(rng)
    write_gazetteer()
    write_lexicon()
    write_vectors(texts, rng)


if __name__ == "__main__":
    main()
