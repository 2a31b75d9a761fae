#!/usr/bin/env python3
"""Writes the synthetic toy corpus (data/toy/toy_raw.json).

Every note is invented; no real patient data. Offsets are Python str indices,
i.e. Unicode code points.
"""
import json
import random
import sys

DRUGS = [
    ("lisinopril", "hypertension"),
    ("metformin", "type 2 diabetes"),
    ("warfarin", "atrial fibrillation"),
    ("furosemide", "volume overload"),
    ("vancomycin", "MRSA bacteremia"),
    ("levothyroxine", "hypothyroidism"),
    ("atorvastatin", "hyperlipidemia"),
    ("pantoprazole", "gastrointestinal bleeding"),
    ("allopurinol", "gout"),
    ("prednisone", "COPD exacerbation"),
    ("heparin", "deep vein thrombosis"),
    ("ceftriaxone", "community acquired pneumonia"),
    ("amiodarone", "ventricular tachycardia"),
    ("insulin glargine", "hyperglycemia"),
    ("nitroglycerin", "chest pain"),
    ("flagyl", "aspiration pneumonia"),
    ("potassium chloride", "hypokalemia"),
    ("haloperidol", "agitation"),
    ("ondansetron", "nausea"),
    ("oxycodone", "postoperative pain"),
    ("digoxin", "rate control"),
    ("clopidogrel", "coronary stent"),
    ("sertraline", "depression"),
    ("gabapentin", "neuropathic pain"),
    ("tamsulosin", "urinary retention"),
    ("albuterol", "wheezing"),
    ("lactulose", "hepatic encephalopathy"),
    ("octreotide", "variceal bleeding"),
]

TESTS = [
    ("dobutamine stress test", "rescheduled", "hypotension"),
    ("colonoscopy", "postponed", "poor bowel preparation"),
    ("cardiac catheterization", "deferred", "acute kidney injury"),
    ("MRI", "cancelled", "claustrophobia"),
    ("thoracentesis", "performed", "pleural effusion"),
    ("echocardiogram", "ordered", "new murmur"),
    ("paracentesis", "performed", "tense ascites"),
    ("bronchoscopy", "delayed", "hypoxemia"),
    ("lumbar puncture", "performed", "suspected meningitis"),
    ("CT angiogram", "ordered", "suspected pulmonary embolism"),
    ("hemodialysis", "initiated", "refractory hyperkalemia"),
    ("EGD", "performed", "melena"),
]

BRANDS = {
    "lisinopril": "Zestril", "metformin": "Glucophage", "warfarin": "Coumadin",
    "furosemide": "Lasix", "vancomycin": "Vancocin", "levothyroxine": "Synthroid",
    "atorvastatin": "Lipitor", "pantoprazole": "Protonix", "allopurinol": "Zyloprim",
    "prednisone": "Deltasone", "heparin": "Hepflush", "ceftriaxone": "Rocephin",
    "amiodarone": "Cordarone", "insulin glargine": "Lantus",
    "nitroglycerin": "Nitrostat", "flagyl": "metronidazole",
    "potassium chloride": "Klor-Con", "haloperidol": "Haldol",
    "ondansetron": "Zofran", "oxycodone": "Roxicodone", "digoxin": "Lanoxin",
    "clopidogrel": "Plavix", "sertraline": "Zoloft", "gabapentin": "Neurontin",
    "tamsulosin": "Flomax", "albuterol": "Ventolin", "lactulose": "Kristalose",
    "octreotide": "Sandostatin",
}

SIDE_EFFECTS = ["gastritis", "a diffuse rash", "dizziness", "bradycardia",
                "elevated liver enzymes", "somnolence"]

FILLER = [
    "Vital signs were reviewed on rounds.",
    "Temperature 38.5°C overnight, now afebrile.",
    "Seen with Dr. Müller from the consult service.",
    "Family was updated at the bedside.",
    "Plan discussed with the primary team.",
    "No acute events reported by nursing.",
]

DRUG_TEMPLATES = [
    ("He was started on {d} for {r}.", "Why was the patient on {d}?"),
    ("{D} was continued due to {r}.", "Why was {d} continued?"),
    ("Given {r}, {d} was added.", "Why was {d} added?"),
    ("{D} was prescribed because of {r}.", "Why was {d} prescribed?"),
    ("{D}: {r}, stable on current dose.", "Why is the patient taking {d}?"),
]

TEST_TEMPLATES = [
    ("The {t} was {a} due to {r}.", "Why was the {t} {a}?"),
    ("{R} led to the {t} being {a}.", "Why was the {t} {a}?"),
    ("The {t} was {a} secondary to {r}.", "Why was the {t} {a}?"),
]


def cap(s):
    return s[0].upper() + s[1:]


def build(n_notes, seed):
    rng = random.Random(seed)
    notes, qas = [], []
    qa_counter = 0
    for i in range(n_notes):
        note_id = "note_%03d" % (i + 1)
        drugs = [DRUGS[(2 * i) % len(DRUGS)], DRUGS[(2 * i + 5) % len(DRUGS)]]
        test = TESTS[i % len(TESTS)]
        parts = []  # (sentence, question, answer)
        for k, (d, r) in enumerate(drugs):
            tmpl, q = DRUG_TEMPLATES[(i + 2 * k) % len(DRUG_TEMPLATES)]
            parts.append((tmpl.format(d=d, D=cap(d), r=r), q.format(d=d), r))
        t, a, r = test
        tmpl, q = TEST_TEMPLATES[i % len(TEST_TEMPLATES)]
        parts.append((tmpl.format(t=t, a=a, r=r, R=cap(r)), q.format(t=t, a=a), r))
        rng.shuffle(parts)
        extra = []
        if i % 2 == 0:
            # The drug sentence that carries a cue names a side effect, the
            # indication sits in a cue-less sentence.
            d, r = DRUGS[(2 * i + 11) % len(DRUGS)]
            side = SIDE_EFFECTS[i % len(SIDE_EFFECTS)]
            extra.append(("%s was held because of %s." % (cap(d), side), None, None))
            extra.append(("%s was originally prescribed; the indication was %s." % (cap(d), r),
                          "Why was the patient on %s?" % d, r))
        else:
            # Question uses a brand name the note never mentions.
            d, r = drugs[0]
            extra.append((None, "Why was the patient on %s?" % BRANDS[d], r))

        text = ""
        spans = []
        fillers = rng.sample(FILLER, 2)
        sentences = [fillers[0]] + [p[0] for p in parts[:2]] + [fillers[1]] + [parts[2][0]]
        sentences += [e[0] for e in extra if e[0]]
        parts += [e for e in extra if e[0] and e[1]]
        for s in sentences:
            if text:
                text += "\n" if rng.random() < 0.3 else " "
            start = len(text)
            text += s
            for sent, q, ans in parts:
                if sent == s:
                    off = start + s.lower().index(ans.lower())
                    spans.append((q, text[off:off + len(ans)], off))
        for sent, q, ans in extra:
            if sent is None:
                off = text.index(ans)
                spans.append((q, ans, off))
        notes.append({"note_id": note_id, "note_text": text})
        for q, ans, off in spans:
            qa_counter += 1
            tag = "heart-disease-risk" if qa_counter % 11 == 0 else (
                "prior-annotation" if qa_counter % 7 == 0 else "emrqa-why")
            qas.append({
                "qa_id": "qa_%07d" % qa_counter,
                "note_id": note_id,
                "question": q,
                "answerable": True,
                "answers": [{"text": ans, "begin_offset": off}],
                "source_tag": tag,
            })
    return {"notes": notes, "qas": qas,
            "provenance": "synthetic toy corpus (make_toy_corpus.py, seed %d)" % seed}


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/toy/toy_raw.json"
    data = build(24, 2019)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")


if __name__ == "__main__":
    main()
