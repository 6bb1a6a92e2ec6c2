#!/usr/bin/env python3
"""Generate the bundled synthetic 20-case corpus with planted gold evidence.

Writes cases.xml, gold.json and ce_scores.tsv into the output directory. The
output is a pure function of --seed.
"""
import argparse
import json
import pathlib
import random
from xml.sax.saxutils import escape

FINDINGS = [
    "chest pain", "shortness of breath", "fever", "abdominal pain", "syncope",
    "headache", "dizziness", "cough", "leg swelling", "palpitations",
    "confusion", "back pain", "nausea", "weakness", "rash",
]
TESTS = [
    "echocardiogram", "chest x-ray", "CT scan", "MRI", "lumbar puncture",
    "blood cultures", "cardiac catheterization", "ultrasound", "EKG",
    "stress test", "urinalysis", "endoscopy",
]
RESULTS = [
    "showed reduced ejection fraction", "ruled out pneumonia",
    "revealed a small effusion", "was negative for bleeding",
    "confirmed a urinary infection", "showed no acute process",
    "demonstrated a blocked artery", "found elevated troponin",
]
TREATMENTS = [
    "furosemide", "ceftriaxone", "metoprolol", "heparin", "verapamil",
    "milrinone", "prednisone", "insulin", "lisinopril", "aspirin",
]
FILLER = [
    "Discharge Instructions:",
    "Brief Hospital Course:",
    "Please follow up with your primary care physician.",
    "Patient was seen by physical therapy.",
    "Diet was advanced as tolerated.",
    "Code status was full code.",
    "Social work was consulted for home services.",
    "Vital signs were stable on the floor.",
    "Family meeting was held on hospital day [**3**].",
    "Follow up in clinic at [**Hospital1 18**] in two weeks.",
]


def note_sentence(rng, kind, finding, test, result, treatment):
    if kind == "presentation":
        return f"The patient presented with {finding} and was admitted for evaluation."
    if kind == "test":
        return f"A {test} was performed and {result}."
    if kind == "treatment":
        return f"The patient was started on {treatment} for the {finding}."
    if kind == "response":
        return f"Symptoms of {finding} improved after {treatment} was given."
    if kind == "distractor":
        other = rng.choice(FINDINGS)
        return f"History of {other} was noted in prior records."
    return rng.choice(FILLER)


def answer_sentence(kind, finding, test, result, treatment):
    if kind == "presentation":
        return f"The patient came to the hospital because of {finding}."
    if kind == "test":
        return f"The {test} {result}."
    if kind == "treatment":
        return f"Doctors treated the {finding} with {treatment}."
    if kind == "response":
        return f"The {finding} got better with {treatment}."
    raise ValueError(kind)


def make_case(rng, case_id):
    finding = rng.choice(FINDINGS)
    test = rng.choice(TESTS)
    result = rng.choice(RESULTS)
    treatment = rng.choice(TREATMENTS)

    evidence_kinds = rng.sample(["presentation", "test", "treatment", "response"], rng.randint(2, 4))
    n_other = rng.randint(4, 10)
    kinds = evidence_kinds + [rng.choice(["filler", "distractor"]) for _ in range(n_other)]
    rng.shuffle(kinds)

    sentences = [note_sentence(rng, k, finding, test, result, treatment) for k in kinds]
    gold_ids = {k: i + 1 for i, k in enumerate(kinds) if k in evidence_kinds}

    answers = []
    for k in evidence_kinds:
        answers.append({"text": answer_sentence(k, finding, test, result, treatment),
                        "citations": [gold_ids[k]]})
    if rng.random() < 0.5:
        answers.append({"text": f"{finding.capitalize()} can have many causes.", "citations": []})

    cited = sorted(gold_ids.values())
    labels = {}
    for i in range(1, len(sentences) + 1):
        if i in cited:
            labels[i] = "essential"
        elif rng.random() < 0.15:
            labels[i] = "supplementary"
        else:
            labels[i] = "not-relevant"

    ce = {}
    for i in range(1, len(sentences) + 1):
        if i in cited:
            score = rng.uniform(0.05, 0.98) if rng.random() < 0.2 else rng.uniform(0.4, 0.98)
        else:
            score = rng.uniform(0.3, 0.7) if rng.random() < 0.1 else rng.uniform(0.0, 0.12)
        ce[i] = round(score, 6)

    return {
        "case_id": str(case_id),
        "patient_question": f"Why was I given {treatment} in the hospital?",
        "clinician_question": f"Why was {treatment} started for the patient's {finding}?",
        "sentences": sentences,
        "labels": labels,
        "answers": answers,
        "ce": ce,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=pathlib.Path, required=True)
    parser.add_argument("--seed", type=int, default=20260)
    parser.add_argument("--cases", type=int, default=20)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    cases = [make_case(rng, i) for i in range(1, args.cases + 1)]
    args.out.mkdir(parents=True, exist_ok=True)

    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<cases>"]
    for c in cases:
        lines.append(f'  <case id="{c["case_id"]}">')
        lines.append(f'    <patient_question>{escape(c["patient_question"])}</patient_question>')
        lines.append(f'    <clinician_question>{escape(c["clinician_question"])}</clinician_question>')
        lines.append("    <note_excerpt_sentences>")
        for i, s in enumerate(c["sentences"], start=1):
            lines.append(f'      <sentence id="{i}">{escape(s)}</sentence>')
        lines.append("    </note_excerpt_sentences>")
        lines.append("    <labels>")
        for i, label in c["labels"].items():
            lines.append(f'      <label sentence="{i}">{label}</label>')
        lines.append("    </labels>")
        lines.append("  </case>")
    lines.append("</cases>")
    (args.out / "cases.xml").write_text("\n".join(lines) + "\n", encoding="utf-8")

    gold = {"cases": [{"case_id": c["case_id"], "answer_sentences": c["answers"]} for c in cases]}
    (args.out / "gold.json").write_text(json.dumps(gold, indent=1) + "\n", encoding="utf-8")

    rows = ["case_id\tsentence_id\tscore"]
    for c in cases:
        for i, score in c["ce"].items():
            rows.append(f'{c["case_id"]}\t{i}\t{score:.6f}')
    (args.out / "ce_scores.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
