#!/usr/bin/env python3
"""Deterministic generator for the bundled reaction corpus and query set.

Emits data/reaction_base.jsonl (500 records) and data/queries.jsonl
(20 labeled queries whose substituent combinations are held out of the base).
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

ALKYL = ["C", "CC", "CCC", "CC(C)", "CCCC", "c1ccccc1", "Cc1ccccc1"]
AMINE_R = ["C", "CC", "CCC", "CC(C)", "CCCC", "c1ccccc1"]
ALCOHOL_R = ["C", "CC", "CCC", "CC(C)", "CCCC"]
ARYL_SUB = ["", "C", "OC", "F", "Cl"]
BORON_SUB = ["", "C", "F", "OC"]
DIENOPHILES = [
    ("C=C", "C1=CCCCC1"),
    ("C=CC#N", "N#CC1CCC=CC1"),
    ("C=CC(=O)OC", "COC(=O)C1CCC=CC1"),
    ("C=CC=O", "O=CC1CCC=CC1"),
]


def aryl(sub, digit):
    return f"c{digit}ccc({sub})cc{digit}" if sub else f"c{digit}ccccc{digit}"


def pick(rng, weighted):
    total = sum(w for _, w in weighted)
    x = rng.uniform(0, total)
    for value, w in weighted:
        x -= w
        if x <= 0:
            return value
    return weighted[-1][0]


def condition(rng, spec):
    c = {"catalyst1": "", "solvent1": "", "solvent2": "", "reagent1": "", "reagent2": ""}
    for slot, weighted in spec.items():
        c[slot] = pick(rng, weighted)
    return c


# per-type: (substituent sampler, reaction builder, condition distribution, gold condition)
TYPES = {}


def amide(r, rp):
    return [f"{r}C(=O)Cl", f"{rp}N"], [f"{r}C(=O)N{rp}"]


TYPES["amide_coupling"] = dict(
    subs=lambda rng: (rng.choice(ALKYL), rng.choice(AMINE_R)),
    build=amide,
    cond={
        "catalyst1": [("", 5), ("DMAP", 2)],
        "solvent1": [("DCM", 5), ("THF", 3), ("MeCN", 2), ("toluene", 2)],
        "reagent1": [("triethylamine", 6), ("DIPEA", 3), ("pyridine", 3), ("NMM", 2),
                     ("DBU", 1)],
    },
    gold={"catalyst1": "", "solvent1": "DCM", "solvent2": "", "reagent1": "triethylamine",
          "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def o_acyl(r, rp):
    return [f"{r}C(=O)Cl", f"{rp}O"], [f"{r}C(=O)O{rp}"]


TYPES["o_acylation"] = dict(
    subs=lambda rng: (rng.choice(ALKYL), rng.choice(ALCOHOL_R)),
    build=o_acyl,
    cond={
        "catalyst1": [("DMAP", 3), ("", 7)],
        "solvent1": [("DCM", 6), ("THF", 2), ("toluene", 1), ("Et2O", 1)],
        "reagent1": [("pyridine", 5), ("triethylamine", 3), ("DIPEA", 1), ("NMM", 1)],
    },
    gold={"catalyst1": "", "solvent1": "DCM", "solvent2": "", "reagent1": "pyridine",
          "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def ester(r, rp):
    return [f"{r}C(=O)O", f"{rp}O"], [f"{r}C(=O)O{rp}"]


TYPES["esterification"] = dict(
    subs=lambda rng: (rng.choice(ALKYL), rng.choice(ALCOHOL_R)),
    build=ester,
    cond={
        "catalyst1": [("TsOH", 6), ("H2SO4", 4)],
        "solvent1": [("toluene", 5), ("benzene", 2), ("xylene", 1), ("dioxane", 1),
                     ("THF", 1)],
        "reagent1": [("", 6), ("MgSO4", 3), ("Na2SO4", 1)],
    },
    gold={"catalyst1": "TsOH", "solvent1": "toluene", "solvent2": "", "reagent1": "",
          "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def suzuki(s1, s2):
    return [f"Br{aryl(s1, 1)}", f"OB(O){aryl(s2, 1)}"], [f"{aryl(s1, 1)}-{aryl(s2, 2)}"]


TYPES["suzuki_coupling"] = dict(
    subs=lambda rng: (rng.choice(ARYL_SUB), rng.choice(BORON_SUB)),
    build=suzuki,
    cond={
        "catalyst1": [("Pd", 7), ("PdCl2", 3)],
        "solvent1": [("dioxane", 5), ("toluene", 3), ("DMF", 1), ("THF", 1)],
        "solvent2": [("water", 6), ("", 4)],
        "reagent1": [("K2CO3", 5), ("K3PO4", 3), ("Cs2CO3", 1), ("Na2CO3", 1)],
    },
    gold={"catalyst1": "Pd", "solvent1": "dioxane", "solvent2": "water", "reagent1": "K2CO3",
          "reagent2": ""},
    holdout=("C#N", ""),
)


def williamson(r, rp):
    return [f"{r}Br", f"{rp}O"], [f"{r}O{rp}"]


TYPES["williamson_ether"] = dict(
    subs=lambda rng: (rng.choice(["CC", "CCC", "CC(C)", "CCCC"]), rng.choice(ALCOHOL_R)),
    build=williamson,
    cond={
        "catalyst1": [("", 7), ("TBAI", 3)],
        "reagent1": [("NaH", 5), ("K2CO3", 3), ("Cs2CO3", 1), ("KOH", 1)],
        "solvent1": [("DMF", 5), ("MeCN", 3), ("THF", 1), ("DMSO", 1)],
    },
    gold={"catalyst1": "", "solvent1": "DMF", "solvent2": "", "reagent1": "NaH", "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def n_alkyl(r, rp):
    return [f"{r}Br", f"{rp}N"], [f"{rp}N{r}"]


TYPES["n_alkylation"] = dict(
    subs=lambda rng: (rng.choice(["CC", "CCC", "CC(C)", "CCCC"]), rng.choice(AMINE_R)),
    build=n_alkyl,
    cond={
        "catalyst1": [("", 8), ("KI", 2)],
        "reagent1": [("K2CO3", 5), ("Cs2CO3", 2), ("triethylamine", 2), ("DIPEA", 1)],
        "solvent1": [("MeCN", 5), ("DMF", 3), ("THF", 1), ("EtOH", 1)],
    },
    gold={"catalyst1": "", "solvent1": "MeCN", "solvent2": "", "reagent1": "K2CO3",
          "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def imine(r, rp):
    return [f"{r}C=O", f"{rp}N"], [f"{r}C=N{rp}"]


TYPES["imine_condensation"] = dict(
    subs=lambda rng: (rng.choice(ALKYL), rng.choice(AMINE_R)),
    build=imine,
    cond={
        "solvent1": [("toluene", 5), ("EtOH", 2), ("MeOH", 1), ("DCM", 1), ("benzene", 1)],
        "catalyst1": [("", 6), ("AcOH", 2), ("TsOH", 2)],
        "reagent1": [("", 7), ("MgSO4", 2), ("Na2SO4", 1)],
    },
    gold={"catalyst1": "", "solvent1": "toluene", "solvent2": "", "reagent1": "", "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def hydrolysis(r, rp):
    return [f"{r}C(=O)O{rp}", "O"], [f"{r}C(=O)O", f"{rp}O"]


TYPES["ester_hydrolysis"] = dict(
    subs=lambda rng: (rng.choice(ALKYL), rng.choice(ALCOHOL_R)),
    build=hydrolysis,
    cond={
        "reagent1": [("NaOH", 5), ("KOH", 3), ("LiOH", 2)],
        "solvent1": [("THF", 5), ("MeOH", 2), ("EtOH", 2), ("dioxane", 1)],
        "solvent2": [("", 5), ("MeOH", 3), ("EtOH", 2)],
    },
    gold={"catalyst1": "", "solvent1": "THF", "solvent2": "", "reagent1": "NaOH",
          "reagent2": ""},
    holdout=("CCCCC", "CCCCC"),
)


def diels_alder(diene, pair):
    dienophile, product = pair
    return [diene, dienophile], [product]


TYPES["diels_alder"] = dict(
    subs=lambda rng: ("C=CC=C", rng.choice(DIENOPHILES)),
    build=diels_alder,
    cond={
        "solvent1": [("toluene", 5), ("benzene", 2), ("xylene", 1), ("DCM", 2)],
        "catalyst1": [("", 6), ("AlCl3", 2), ("ZnCl2", 1), ("BF3", 1)],
        "reagent1": [("", 8), ("BHT", 2)],
    },
    gold={"catalyst1": "", "solvent1": "toluene", "solvent2": "", "reagent1": "", "reagent2": ""},
    holdout=("C=CC=C", DIENOPHILES[3]),
)

QUERY_SUBS = {
    "amide_coupling": [("CCCCC", "CC"), ("CC", "c1ccccc1"), ("c1ccccc1", "CCC")],
    "o_acylation": [("CCCCC", "CC"), ("CC(C)", "CCC")],
    "esterification": [("CCCCC", "CC"), ("c1ccccc1", "CC(C)")],
    "suzuki_coupling": [("C", "F"), ("OC", "C"), ("Cl", "OC")],
    "williamson_ether": [("CCCC", "CC"), ("CC", "CCC")],
    "n_alkylation": [("CCC", "c1ccccc1"), ("CCCC", "CC")],
    "imine_condensation": [("CC", "CCC"), ("c1ccccc1", "C")],
    "ester_hydrolysis": [("CC", "CCC"), ("CCC", "C")],
    "diels_alder": [("C=CC=C", DIENOPHILES[1]), ("C=CC=C", DIENOPHILES[2])],
}


def main():
    rng = random.Random(20260824)
    per_type = 500 // len(TYPES)
    extra = 500 - per_type * len(TYPES)
    records = []
    query_keys = {(t, subs) for t, combos in QUERY_SUBS.items() for subs in combos}
    for ti, (tau, spec) in enumerate(sorted(TYPES.items())):
        n = per_type + (1 if ti < extra else 0)
        made = 0
        while made < n:
            subs = spec["subs"](rng)
            if (tau, subs) in query_keys:
                continue
            reactants, products = spec["build"](*subs)
            rec = {
                "id": f"rb-{len(records) + 1:04d}",
                "reaction_type": tau,
                "reactants": reactants,
                "products": products,
                **condition(rng, spec["cond"]),
                "provenance": "synthetic-v1",
            }
            records.append(rec)
            made += 1

    with open(OUT / "reaction_base.jsonl", "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")

    queries = []
    for tau, combos in sorted(QUERY_SUBS.items()):
        for subs in combos:
            reactants, products = TYPES[tau]["build"](*subs)
            queries.append({
                "id": f"q-{len(queries) + 1:02d}",
                "reaction_type": tau,
                "reactants": reactants,
                "products": products,
                **TYPES[tau]["gold"],
                "provenance": "query-v1",
            })
    assert len(queries) == 20, len(queries)
    with open(OUT / "queries.jsonl", "w") as f:
        for q in queries:
            f.write(json.dumps(q) + "\n")
    print(f"wrote {len(records)} records, {len(queries)} queries")


if __name__ == "__main__":
    main()
