"""Writes small source files in the layout of the three public external datasets.

Values are drawn from a seeded generator in which CKD cases carry more
hypertension, diabetes, anemia and age. Rerunning reproduces the files.
"""
import csv
import io
import random
import zipfile
from pathlib import Path

HERE = Path(__file__).resolve().parent
ZIP_TIME = (2020, 1, 1, 0, 0, 0)


def flag(rng, p):
    return rng.random() < p


def write_zip(path, members):
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as z:
        for name, data, *method in members:
            z.writestr(zipfile.ZipInfo(name, ZIP_TIME), data, compress_type=method[0] if method else zipfile.ZIP_DEFLATED)


def uci2015(rng):
    cols = ["age", "bp", "sg", "al", "su", "rbc", "pc", "pcc", "ba", "bgr", "bu", "sc", "sod", "pot", "hemo",
            "pcv", "wbcc", "rbcc", "htn", "dm", "cad", "appet", "pe", "ane", "class"]
    nominal = {"rbc": "normal,abnormal", "pc": "normal,abnormal", "pcc": "present,notpresent",
               "ba": "present,notpresent", "htn": "yes,no", "dm": "yes,no", "cad": "yes,no",
               "appet": "good,poor", "pe": "yes,no", "ane": "yes,no", "class": "ckd,notckd"}
    out = ["@relation Chronic_Kidney_Disease", ""]
    for c in cols:
        out.append(f"@attribute '{c}' " + ("{" + nominal[c] + "}" if c in nominal else "numeric"))
    out += ["", "@data"]
    for i in range(60):
        ckd = i < 36
        age = rng.randint(48, 80) if ckd else rng.randint(20, 58)
        row = {c: "?" for c in cols}
        row.update(age=str(age), bp=str(rng.choice([70, 80, 90])), sc=f"{rng.uniform(0.6, 4):.1f}",
                   bu=str(rng.randint(15, 90)), hemo=f"{rng.uniform(9, 16):.1f}",
                   rbc="abnormal" if flag(rng, 0.45 if ckd else 0.05) else "normal",
                   htn="yes" if flag(rng, 0.8 if ckd else 0.05) else "no",
                   dm="yes" if flag(rng, 0.6 if ckd else 0.05) else "no",
                   ane="yes" if flag(rng, 0.4 if ckd else 0.02) else "no",
                   pc="normal", cad="no", appet="good", pe="no")
        row["class"] = "ckd" if ckd else "notckd"
        for c in ("rbc", "bp", "age"):
            if flag(rng, 0.08):
                row[c] = "?"
        out.append(",".join(row[c] for c in cols))
    arff = "\n".join(out) + "\n"
    write_zip(HERE / "uci2015.zip", [("Chronic_Kidney_Disease/chronic_kidney_disease_full.arff", arff),
                                     ("Chronic_Kidney_Disease/chronic_kidney_disease.info.txt", "fixture\n", zipfile.ZIP_STORED)])


def uci2023(rng):
    cols = ["bp (Diastolic)", "bp limit", "sg", "al", "class", "rbc", "su", "pc", "pcc", "ba", "bgr", "bu",
            "sod", "sc", "pot", "hemo", "pcv", "rbcc", "wbcc", "htn", "dm", "cad", "appet", "pe", "ane",
            "grf", "stage", "affected", "age"]
    young = ["12 - 20", "20 - 27", "27 - 35", "35 - 43"]
    old = ["51 - 59", "59 - 66", "66 - 74", "≥ 74"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    w.writerow(["discrete"] * len(cols))
    w.writerow([""] * (len(cols) - 1) + ["meta"])
    for i in range(50):
        ckd = i < 30
        row = {c: "0" for c in cols}
        row.update({"class": "ckd" if ckd else "notckd", "age": rng.choice(old if ckd else young),
                    "htn": "1" if flag(rng, 0.8 if ckd else 0.05) else "0",
                    "dm": "1" if flag(rng, 0.6 if ckd else 0.05) else "0",
                    "ane": "1" if flag(rng, 0.4 if ckd else 0.02) else "0",
                    "rbc": "1" if flag(rng, 0.45 if ckd else 0.05) else "0",
                    "stage": "s3" if ckd else "s1", "affected": "1" if ckd else "0", "grf": "≥ 227.944",
                    "sc": "< 3.65", "bu": "< 48.1"})
        w.writerow([row[c] for c in cols])
    inner = io.BytesIO()
    with zipfile.ZipFile(inner, "w", zipfile.ZIP_DEFLATED) as z:
        z.writestr(zipfile.ZipInfo("ckd-dataset-v2.csv", ZIP_TIME), buf.getvalue(), compress_type=zipfile.ZIP_DEFLATED)
    write_zip(HERE / "uci2023.zip", [("risk_factor_prediction.zip", inner.getvalue())])


def th(rng):
    cols = ["Sex", "AgeBaseline", "HistoryDiabetes", "HistoryCHD", "HistoryVascular", "HistorySmoking",
            "HistoryHTN", "HistoryDLD", "HistoryObesity", "DLDmeds", "DMmeds", "HTNmeds", "ACEIARB",
            "CholesterolBaseline", "TriglyceridesBaseline", "HgbA1C", "CreatinineBaseline", "eGFRBaseline",
            "sBPBaseline", "dBPBaseline", "BMIBaseline", "TimeToEventMonths", "EventCKD35"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i in range(48):
        ckd = i % 6 == 0
        row = {c: "0" for c in cols}
        row.update(Sex=str(rng.randint(0, 1)), AgeBaseline=str(rng.randint(55, 85) if ckd else rng.randint(25, 70)),
                   HistoryDiabetes="1" if flag(rng, 0.7 if ckd else 0.3) else "0",
                   HistoryCHD="1" if flag(rng, 0.3 if ckd else 0.1) else "0",
                   HistorySmoking="1" if flag(rng, 0.2) else "0",
                   HistoryHTN="1" if flag(rng, 0.9 if ckd else 0.4) else "0",
                   CholesterolBaseline=f"{rng.uniform(3.5, 7.5):.2f}",
                   TriglyceridesBaseline=f"{rng.uniform(0.8, 3.2):.2f}",
                   CreatinineBaseline=str(rng.randint(50, 110)), eGFRBaseline=str(rng.randint(60, 110)),
                   BMIBaseline=f"{rng.uniform(20, 38):.1f}", TimeToEventMonths=str(rng.randint(20, 100)),
                   EventCKD35="1" if ckd else "0")
        if i == 5:
            row["BMIBaseline"] = ""
        w.writerow([row[c] for c in cols])
    (HERE / "th.csv").write_text(buf.getvalue(), encoding="utf-8")


if __name__ == "__main__":
    rng = random.Random(42)
    uci2015(rng)
    uci2023(rng)
    th(rng)
