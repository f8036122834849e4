#!/usr/bin/env python3
"""Regenerates the synthetic sample datasets under data/samples/."""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "samples")
N = 64

NAMES = ["Ava", "Liam", "Noah", "Mia", "Zoe", "Eli", "Ivy", "Max",
         "Ana", "Leo", "Kai", "Uma", "Tom", "Ben", "Sam", "Joy"]
THINGS = ["pencils", "apples", "marbles", "books", "coins",
          "stickers", "cards", "shells", "stamps", "buttons"]
PLACES = ["the library", "the marina", "the museum", "the old mill",
          "the market square", "the botanical garden", "the café", "the station"]
TOPICS = ["guitar", "chess", "rowing", "baking", "calligraphy",
          "juggling", "archery", "origami"]


def write(name, rows):
    path = os.path.join(OUT, name)
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"{path}: {len(rows)} rows")


def gsm8k():
    rows = []
    for i in range(N):
        name = NAMES[i % len(NAMES)]
        thing = THINGS[i % len(THINGS)]
        a = 3 + (i * 7) % 23
        b = 2 + (i * 5) % 17
        c = 1 + (i * 3) % min(a + b - 1, 11)
        q = (f"{name} has {a} {thing} and buys {b} more at {PLACES[i % len(PLACES)]}. "
             f"After giving {c} {thing} to a friend, how many {thing} does {name} have left?")
        rows.append({"id": f"g{i:04d}", "question": q,
                     "gold": f"{a} + {b} = {a+b}. {a+b} - {c} = {a+b-c}. #### {a+b-c:,}"})
    write("gsm8k.jsonl", rows)


def svamp():
    rows = []
    for i in range(N):
        name = NAMES[(i + 3) % len(NAMES)]
        thing = THINGS[(i + 1) % len(THINGS)]
        a = 4 + (i * 11) % 31
        b = 1 + (i * 13) % 19
        body = f"{name} had {a} {thing} in a box. {name} then bought {b} more {thing} from {PLACES[i % len(PLACES)]}."
        q = f"How many {thing} does {name} have now?"
        rows.append({"id": f"s{i:04d}", "body": body, "question": q, "gold": str(a + b)})
    write("svamp.jsonl", rows)


def rte():
    rows = []
    for i in range(N):
        name = NAMES[i % len(NAMES)]
        place = PLACES[i % len(PLACES)]
        year = 1990 + (i * 3) % 30
        premise = (f"{name} founded a small workshop near {place} in {year}, "
                   f"and it grew into a well-known local business.")
        if i % 2 == 0:
            hypothesis = f"{name} started a workshop in {year}."
            gold = "1"
        else:
            hypothesis = f"{name} closed the workshop in {year} and left the town."
            gold = "0"
        rows.append({"id": f"r{i:04d}", "premise": premise,
                     "hypothesis": hypothesis, "gold": gold})
    write("rte.jsonl", rows)


def boolq():
    rows = []
    for i in range(N):
        name = NAMES[(i + 5) % len(NAMES)]
        place = PLACES[i % len(PLACES)]
        topic = TOPICS[i % len(TOPICS)]
        day = 1 + (i * 5) % 28
        passage = (f"{name} teaches a weekly {topic} class at {place}. The class meets on "
                   f"day {day} of each month and is open to beginners, though advanced "
                   f"students may attend the evening session.")
        if i % 2 == 0:
            question = f"is the {topic} class at {place} open to beginners"
            gold = "1"
        else:
            question = f"does the {topic} class at {place} require prior experience"
            gold = "0"
        rows.append({"id": f"b{i:04d}", "passage": passage,
                     "question": question, "gold": gold})
    write("boolq.jsonl", rows)


def qqp():
    rows = []
    for i in range(N):
        topic = TOPICS[i % len(TOPICS)]
        place = PLACES[(i + 2) % len(PLACES)]
        q1 = f"How do I get started with {topic} as a complete beginner (lesson {i})?"
        if i % 2 == 0:
            q2 = f"What is a good way for a total beginner to start learning {topic} (lesson {i})?"
            gold = "1"
        else:
            q2 = f"Where can I buy secondhand {topic} equipment near {place} (lesson {i})?"
            gold = "0"
        rows.append({"id": f"q{i:04d}", "question1": q1, "question2": q2, "gold": gold})
    write("qqp.jsonl", rows)


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    gsm8k()
    svamp()
    rte()
    boolq()
    qqp()
