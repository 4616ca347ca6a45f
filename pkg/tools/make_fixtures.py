#!/usr/bin/env python3
"""Regenerate the bundled replay fixtures.

A deterministic scripted stand-in plays the LLM: fact-assist prompts are
answered from a hand-written sentence->facts table, answer prompts from a
pinned prose table.  Recording a full pipeline pass through it yields the
demo cassette; a second pass whose answerer always returns garbage yields
the forced-failure cassette that exercises the verbatim fallback.  Both
runs assert that every final response checks out faithful before anything
is written, so a regression in the pipeline cannot silently poison the
fixtures.

Usage:  python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from acurai.facts import FFFConfig, build_fact_sets, load_prompts
from acurai.faithfulness import FAITHFUL, check_response
from acurai.llm import CallableClient, ChatRequest, RecordingClient
from acurai.pipeline import PipelineConfig, run
from acurai.query_split import split_query

RESOURCES = Path(__file__).resolve().parents[1] / "src" / "acurai" / "resources"
DEMO_CASSETTE = RESOURCES / "cassettes" / "demo.json"
FAILURE_CASSETTE = RESOURCES / "cassettes" / "forced_failure.json"
SAMPLES = RESOURCES / "samples"

CORRUPT_ANSWER = "According to legend, 999 golden unicorns invented this topic on the moon."

# --------------------------------------------------------------------------
# fixture source material

FLAGSHIP_QUERY = "What are the chemical and physical properties of calcium and magnesium?"

FLAGSHIP_PASSAGES = [
    (
        "The chemical properties of calcium are reacts with oxygen and reacts with "
        "water. There are other chemical properties, but not all of them are true for "
        "calcium.These are the two that I know.he chemical properties of calcium are "
        "reacts with oxygen and reacts with water. There are other chemical properties, "
        "but not all of them are true for calcium."
    ),
    (
        "Chemical and Physical Properties of Magnesium. Magnesium is one of the most "
        "important elements that is present in many compounds as well as alloys. It is "
        "widely used as a chemical reagent, desulfurization agent, and vital ingredient "
        "in fireworks.It finds multiple applications due to its unique chemical and "
        "physical properties.s mentioned in the chemical properties, magnesium is also "
        "present in many other compounds like dolomite, magnesium carbonate (that is "
        "also known as magnesite), and magnesium sulfate (which is also known by the "
        "name epsomite)."
    ),
    (
        "Calcium: Physical Properties --silver-grey metal. melts at 840°C, boils "
        "at 1484°C to produce monatomic gas. density 1540 kg/m\\^3. conductor of "
        "electricity but a poor one com …pared to most other metals.Diamagnetic. "
        "Chemical properties --tarnishes rapidly in air to produce a powdery, flaky "
        "oxide coating.Reacts steadily with water, giving off bubbles of hydrogen and a "
        "solution/slurry or alkaline, sparingly soluble calcium hydroxide. Flammable at "
        "high temperatures with oxygen, or air.an also burn in nitrogen to form calcium "
        "nitride or carbon dioxide to form calcium carbonate. Nearly all compounds are "
        "in oxidation state +2, and the water chemistry of calcium is dominated by the "
        "hydrated Ca(2+) ion"
    ),
]

ICE_QUERY = "benefits of ice for neck"

ICE_PASSAGES = [
    (
        "All it requires is that every day you lay on your tummy. Place an ice cube at "
        "the base of your skull on your neck (see the point on the neck shown in the "
        "video), and allow it to rest there for 20 minutes. Do this in the morning on "
        "an empty stomach and before you go to sleep. It has been said that this "
        "technique can provide a variety of benefits to your body, as well as boost "
        "your mood and mental health. After consistent use for a month potential "
        "health benefits include improved digestion and sleep, reduced thyroid issues "
        "and PMS symptoms, cure common colds, alleviate headaches or toothaches, and "
        "reduce overall risks associated with lung and cardiovascular diseases."
    ),
    (
        "For the hardcore: Ice bath Grab three bags of ice from a convenience store "
        "and fill your bath tub halfway full with cold water. Pour the ice in. (The "
        "first few times you take an ice bath, only immerse your lower body, from the "
        "hips down. After you get more comfortable with sitting in the ice bath, begin "
        "slowly lowering your upper torso until submerged, up to your neck if you can "
        "handle it.) Sip a cup of hot tea and read a magazine to take your mind off "
        "the bath."
    ),
    (
        "Woman Places An Ice Cube On This Spot Of Her Neck For A Month. I Had No Idea "
        "It Would Do THIS For as long as man has existed on earth he has been "
        "searching for a fountain of youth."
    ),
]

ICE_BASELINE_RESPONSE = (
    "Applying ice to the base of the neck has been suggested to provide a variety of "
    "benefits. This includes improved digestion and sleep, reduced thyroid issues and "
    "PMS symptoms, alleviation of common colds, headaches or toothaches, and reduced "
    "risks associated with lung and cardiovascular diseases. It can also potentially "
    "boost mood and mental health."
)

ICE_ANSWER = (
    "Placing an ice cube at the base of your skull, on your neck, can provide a "
    "variety of benefits. The technique is simple: just let the ice cube rest there "
    "for about 20 minutes. Besides providing an overall boost to your mood and mental "
    "health, consistent use of this technique for a period of one month can lead to "
    "potential health benefits such as improved digestion and sleep. Additionally, "
    "it's been found to help reduce symptoms associated with thyroid issues and "
    "Pre-menstrual Syndrome (PMS). But the benefits don't stop there, this technique "
    "can also help to cure common colds and alleviate discomfort from headaches or "
    "toothaches. Furthermore, using this technique can contribute to a reduction in "
    "risks associated with lung and cardiovascular diseases."
)

CHICKEN_QUERY = "How do I reheat chicken already cooked?"

CHICKEN_PASSAGES = [
    (
        "Step 1. Place the chicken on a microwave-safe plate or dish. If you are "
        "reheating pieces, place the largest, meatiest pieces towards the outside of "
        "the dish and smaller pieces in the center. Food on the outer edge of the dish "
        "cooks faster.tep 4. Reheat the chicken for two to three minutes, then turn "
        "the pieces over and stir the sauce. Resume cooking for an additional two to "
        "three minutes, or until the center of the thickest piece of chicken is cooked "
        "to an internal temperature of at least 165 degrees Fahrenheit."
    ),
]

CHICKEN_ANSWER = (
    "Place the chicken on a microwave-safe plate or dish. If you are reheating "
    "pieces, place the largest, meatiest pieces towards the outside of the dish and "
    "smaller pieces in the center. Reheat the chicken for two to three minutes, then "
    "turn the pieces over and stir the sauce. Resume cooking for an additional two to "
    "three minutes, or until the center of the thickest piece of chicken is cooked to "
    "an internal temperature of at least 165 degrees Fahrenheit."
)

WAGE_QUERY = "history of minimum wage"

WAGE_PASSAGES = [
    (
        "No state minimum wage law. The minimum wage in the United States is a network "
        "of federal, state, and local laws. Employers generally must pay workers the "
        "highest minimum wage prescribed by federal, state, or summer local law. As of "
        "July 2016, the federal government mandates a nationwide minimum wage of $7.25 "
        "per hour. As of October 2016, there are 29 states with a minimum wage higher "
        "than the federal minimum."
    ),
]

WAGE_ANSWER = (
    "The minimum wage in the United States is a network of federal, state, and local "
    "laws. Employers generally must pay workers the highest minimum wage prescribed "
    "by federal, state, or local law. As of July 2016, the federal government "
    "mandates a nationwide minimum wage of $7.25 per hour. As of October 2016, there "
    "are 29 states with a minimum wage higher than the federal minimum."
)

REVOLUTION_QUERY = "what did the industrial revolution do for society"

REVOLUTION_PASSAGES = [
    (
        "The industrial revolution was a period of major industrialization that "
        "occurred between the late 1700s and the early 1900s. The industrial "
        "revolution changed society. It shifted labor from homes and farms to "
        "factories and mills."
    ),
]

REVOLUTION_ANSWER = (
    "The industrial revolution changed society. It shifted labor from homes and "
    "farms to factories and mills. It occurred between the late 18th and early 20th "
    "century."
)

# --------------------------------------------------------------------------
# scripted model behaviour

# sentence reaching the fact-assist prompt -> rewritten facts (or NONE)
ASSIST: dict[str, str] = {
    # calcium / magnesium
    "There are other chemical properties, but not all of them are true for calcium.": "NONE",
    "These are the two that I know.": "NONE",
    "he chemical properties of calcium are reacts with oxygen and reacts with water.": (
        "The chemical properties of calcium react with oxygen.\n"
        "The chemical properties of calcium react with water."
    ),
    "Reacts steadily with water, giving off bubbles of hydrogen and a solution/slurry or alkaline, sparingly soluble calcium hydroxide.": (
        "Calcium reacts steadily with water.\n"
        "Calcium gives off bubbles of hydrogen.\n"
        "Calcium produces a solution/slurry of alkaline, sparingly soluble calcium hydroxide."
    ),
    "an also burn in nitrogen to form calcium nitride or carbon dioxide to form calcium carbonate.": (
        "Calcium can also burn in nitrogen to form calcium nitride.\n"
        "Calcium can also burn in carbon dioxide to form calcium carbonate."
    ),
    "Nearly all compounds are in oxidation state +2, and the water chemistry of calcium is dominated by the hydrated Ca(2+) ion": (
        "Nearly all Calcium's compounds are in oxidation state +2.\n"
        "The water chemistry of calcium is dominated by the hydrated Ca(2+) ion."
    ),
    "Magnesium is one of the most important elements that is present in many compounds as well as alloys.": (
        "Magnesium is one of the most important elements.\n"
        "Magnesium is present in many compounds as well as alloys."
    ),
    "It is widely used as a chemical reagent, desulfurization agent, and vital ingredient in fireworks.": (
        "Magnesium is widely used as a chemical reagent.\n"
        "Magnesium is widely used as a desulfurization agent.\n"
        "Magnesium is a vital ingredient in fireworks."
    ),
    "It finds multiple applications due to its unique chemical and physical properties.": (
        "Magnesium finds multiple applications."
    ),
    "s mentioned in the chemical properties, magnesium is also present in many other compounds like dolomite, magnesium carbonate (that is also known as magnesite), and magnesium sulfate (which is also known by the name epsomite).": (
        "Magnesium is present in many other compounds.\n"
        "Magnesium carbonate is also known as magnesite.\n"
        "Magnesium sulfate is also known as epsomite."
    ),
    # ice for neck
    "All it requires is that every day you lay on your tummy.": (
        "You lay on your tummy every day."
    ),
    "Place an ice cube at the base of your skull on your neck (see the point on the neck shown in the video), and allow it to rest there for 20 minutes.": (
        "You place an ice cube at the base of your skull on your neck.\n"
        "You see the point on the neck shown in the video.\n"
        "You allow the ice cube to rest there for 20 minutes."
    ),
    "Do this in the morning on an empty stomach and before you go to sleep.": (
        "You do the technique in the morning on an empty stomach.\n"
        "You do the technique before you go to sleep."
    ),
    "It has been said that this technique can provide a variety of benefits to your body, as well as boost your mood and mental health.": (
        "The technique can provide a variety of benefits to your body.\n"
        "The technique can boost your mood and mental health."
    ),
    "After consistent use for a month potential health benefits include improved digestion and sleep, reduced thyroid issues and PMS symptoms, cure common colds, alleviate headaches or toothaches, and reduce overall risks associated with lung and cardiovascular diseases.": (
        "Potential health benefits include improved digestion and sleep.\n"
        "Potential health benefits include reduced thyroid issues and PMS symptoms.\n"
        "The technique can cure common colds.\n"
        "The technique can alleviate headaches.\n"
        "The technique can alleviate toothaches.\n"
        "The technique can reduce overall risks associated with lung and cardiovascular diseases."
    ),
    "For the hardcore: Ice bath Grab three bags of ice from a convenience store and fill your bath tub halfway full with cold water.": (
        "You grab three bags of ice from a convenience store.\n"
        "You fill your bath tub halfway full with cold water."
    ),
    "Pour the ice in.": "You pour the ice in.",
    "After you get more comfortable with sitting in the ice bath, begin slowly lowering your upper torso until submerged, up to your neck if you can handle it.)": (
        "You begin slowly lowering your upper torso up to your neck."
    ),
    "Sip a cup of hot tea and read a magazine to take your mind off the bath.": (
        "You sip a cup of hot tea.\n"
        "You read a magazine to take your mind off the bath."
    ),
    "Woman Places An Ice Cube On This Spot Of Her Neck For A Month.": "NONE",
    "I Had No Idea It Would Do THIS For as long as man has existed on earth he has been searching for a fountain of youth.": "NONE",
    # reheating chicken
    "Step 1.": "NONE",
    "tep 4.": "NONE",
    "Place the chicken on a microwave-safe plate or dish.": (
        "You place the chicken on a microwave-safe plate or dish."
    ),
    "If you are reheating pieces, place the largest, meatiest pieces towards the outside of the dish and smaller pieces in the center.": (
        "You place the largest, meatiest pieces towards the outside of the dish.\n"
        "You place smaller pieces in the center."
    ),
    "Reheat the chicken for two to three minutes, then turn the pieces over and stir the sauce.": (
        "You reheat the chicken for two to three minutes.\n"
        "You turn the pieces over.\n"
        "You stir the sauce."
    ),
    "Resume cooking for an additional two to three minutes, or until the center of the thickest piece of chicken is cooked to an internal temperature of at least 165 degrees Fahrenheit.": (
        "You resume cooking for an additional two to three minutes.\n"
        "The center of the thickest piece of chicken is cooked to an internal "
        "temperature of at least 165 degrees Fahrenheit."
    ),
    # minimum wage
    "Employers generally must pay workers the highest minimum wage prescribed by federal, state, or summer local law.": (
        "Employers generally must pay workers the highest minimum wage."
    ),
    # industrial revolution
    "The industrial revolution was a period of major industrialization that occurred between the late 1700s and the early 1900s.": (
        "The industrial revolution occurred between the late 1700s and the early 1900s."
    ),
    "It shifted labor from homes and farms to factories and mills.": (
        "The industrial revolution shifted labor from homes and farms to factories and mills."
    ),
}

RECORDS = [
    {
        "response_id": "calcium-magnesium",
        "query": FLAGSHIP_QUERY,
        "passages": FLAGSHIP_PASSAGES,
        "model": "gpt-4o-mini",
        "dataset": "other",
    },
    {
        "response_id": "7969",
        "query": ICE_QUERY,
        "passages": ICE_PASSAGES,
        "model": "gpt-4-0613",
        "dataset": "gpt4-subtle",
        "original_response": ICE_BASELINE_RESPONSE,
    },
    {
        "response_id": "8285",
        "query": CHICKEN_QUERY,
        "passages": CHICKEN_PASSAGES,
        "model": "gpt-3.5-turbo",
        "dataset": "other",
    },
    {
        "response_id": "9824",
        "query": WAGE_QUERY,
        "passages": WAGE_PASSAGES,
        "model": "gpt-3.5-turbo",
        "dataset": "other",
    },
    {
        "response_id": "9692",
        "query": REVOLUTION_QUERY,
        "passages": REVOLUTION_PASSAGES,
        "model": "gpt-3.5-turbo",
        "dataset": "other",
    },
]


def scripted_model(prompts: dict, answers: dict[str, str]):
    """Request -> content function for the recording pass; fails loudly on
    anything the script does not cover."""

    def fn(request: ChatRequest) -> str:
        system = request.messages[0].content
        user = request.messages[1].content
        if system == prompts["fff_assist"]["system"]:
            sentence = user.split("\nSentence: ", 1)[1]
            if sentence not in ASSIST:
                raise SystemExit(f"make_fixtures: no scripted assist for:\n  {sentence!r}")
            return ASSIST[sentence]
        if system == prompts["answer"]["system"]:
            if "not supported by the sections above" in user:
                raise SystemExit(f"make_fixtures: unexpected retry prompt:\n{user}")
            query = user.split("\n\n", 1)[0]
            if query not in answers:
                raise SystemExit(f"make_fixtures: no scripted answer for query {query!r}")
            return answers[query]
        raise SystemExit(f"make_fixtures: unrecognized system prompt {system!r}")

    return fn


def corrupting_model(prompts: dict):
    """Same fact assists, but every answer/retry comes back as garbage."""

    def fn(request: ChatRequest) -> str:
        system = request.messages[0].content
        user = request.messages[1].content
        if system == prompts["fff_assist"]["system"]:
            sentence = user.split("\nSentence: ", 1)[1]
            if sentence not in ASSIST:
                raise SystemExit(f"make_fixtures: no scripted assist for:\n  {sentence!r}")
            return ASSIST[sentence]
        return CORRUPT_ANSWER

    return fn


def flagship_answers(prompts: dict) -> dict[str, str]:
    """Per-atomic-query prose for the calcium/magnesium fixture: each answer
    restates its packet's facts, which is as faithful as prose gets."""
    split = split_query(FLAGSHIP_QUERY)
    client = RecordingClient(
        CallableClient(scripted_model(prompts, {}), model="gpt-4o-mini"), DEMO_CASSETTE
    )
    packets = build_fact_sets(
        FLAGSHIP_PASSAGES, list(split.queries), llm=client, config=FFFConfig()
    )
    return {
        q.text: " ".join(packets[q].fact_set.statement_texts()) for q in split.queries
    }


def record_pass(cassette: Path, prompts: dict, answers: dict[str, str], corrupt: bool) -> None:
    cassette.unlink(missing_ok=True)
    for record in RECORDS:
        config = PipelineConfig(model=record["model"])
        if corrupt:
            inner = CallableClient(corrupting_model(prompts), model=record["model"])
        else:
            inner = CallableClient(scripted_model(prompts, answers), model=record["model"])
        client = RecordingClient(inner, cassette)
        response, trace = run(record["query"], list(record["passages"]), config, client)
        report = check_response(response, record["passages"])
        if report.verdict != FAITHFUL:
            for r in report.unsupported:
                print(f"  UNSUPPORTED ({record['response_id']}): {r.statement}", file=sys.stderr)
            raise SystemExit(f"make_fixtures: {record['response_id']} not faithful")
        fellback = [qt.used_fallback for qt in trace.query_traces if qt.llm_calls]
        if corrupt and not all(fellback):
            raise SystemExit(f"make_fixtures: {record['response_id']} skipped the fallback")
        mode = "forced-failure" if corrupt else "demo"
        print(f"  [{mode}] {record['response_id']}: faithful "
              f"(queries={len(trace.query_traces)}, retries={trace.retries_used})")


def main() -> None:
    prompts = load_prompts()
    SAMPLES.mkdir(parents=True, exist_ok=True)
    DEMO_CASSETTE.parent.mkdir(parents=True, exist_ok=True)
    DEMO_CASSETTE.unlink(missing_ok=True)

    answers = flagship_answers(prompts)
    answers[ICE_QUERY] = ICE_ANSWER
    answers[CHICKEN_QUERY] = CHICKEN_ANSWER
    answers[WAGE_QUERY] = WAGE_ANSWER
    answers[REVOLUTION_QUERY] = REVOLUTION_ANSWER

    print("recording demo cassette:")
    record_pass(DEMO_CASSETTE, prompts, answers, corrupt=False)
    print("recording forced-failure cassette:")
    record_pass(FAILURE_CASSETTE, prompts, answers, corrupt=True)

    flagship = {"query": FLAGSHIP_QUERY, "passages": FLAGSHIP_PASSAGES}
    (SAMPLES / "flagship.json").write_text(
        json.dumps(flagship, indent=2, ensure_ascii=False) + "\n", "utf-8"
    )
    with open(SAMPLES / "ragtruth_demo.jsonl", "w", encoding="utf-8") as fh:
        for record in RECORDS:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    print(f"wrote {DEMO_CASSETTE.relative_to(RESOURCES.parents[2])}")
    print(f"wrote {FAILURE_CASSETTE.relative_to(RESOURCES.parents[2])}")
    print(f"wrote {SAMPLES.relative_to(RESOURCES.parents[2])}/flagship.json and ragtruth_demo.jsonl")


if __name__ == "__main__":
    main()
