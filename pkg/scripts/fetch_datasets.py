#!/usr/bin/env python3
"""Download the benchmark datasets and normalize them to data/*.csv.

Needs internet access to archive.ics.uci.edu and raw.githubusercontent.com;
the test suite's desk-scale checks skip when these files are absent.

Output layout (header row, label column named "class"):
    data/sonar.csv     208 rows, 60 numeric features
    data/spectf.csv    267 rows (train+test), 44 numeric features
    data/soybean.csv   307 rows, 35 categorical features, '?' = missing
    data/nslkdd.csv    125973 rows, 41 features, attack labels grouped
                       into normal/dos/probe/r2l/u2r
"""

from __future__ import annotations

import argparse
import csv
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
SOURCES = {
    "sonar": [f"{UCI}/undocumented/connectionist-bench/sonar/sonar.all-data"],
    "spectf": [f"{UCI}/spect/SPECTF.train", f"{UCI}/spect/SPECTF.test"],
    "soybean": [f"{UCI}/soybean/soybean-large.data"],
    "nslkdd": ["https://raw.githubusercontent.com/defcom17/NSL_KDD/master/KDDTrain%2B.txt"],
}

NSL_KDD_COLUMNS = [
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in",
    "num_compromised", "root_shell", "su_attempted", "num_root", "num_file_creations",
    "num_shells", "num_access_files", "num_outbound_cmds", "is_host_login",
    "is_guest_login", "count", "srv_count", "serror_rate", "srv_serror_rate",
    "rerror_rate", "srv_rerror_rate", "same_srv_rate", "diff_srv_rate",
    "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count",
    "dst_host_same_srv_rate", "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate", "dst_host_srv_serror_rate",
    "dst_host_rerror_rate", "dst_host_srv_rerror_rate",
]

ATTACK_CATEGORY = {
    "normal": "normal",
    **dict.fromkeys(
        ["back", "land", "neptune", "pod", "smurf", "teardrop", "apache2",
         "udpstorm", "processtable", "worm", "mailbomb"], "dos"),
    **dict.fromkeys(["satan", "ipsweep", "nmap", "portsweep", "mscan", "saint"], "probe"),
    **dict.fromkeys(
        ["guess_passwd", "ftp_write", "imap", "phf", "multihop", "warezmaster",
         "warezclient", "spy", "xlock", "xsnoop", "snmpguess", "snmpgetattack",
         "httptunnel", "sendmail", "named"], "r2l"),
    **dict.fromkeys(
        ["buffer_overflow", "loadmodule", "rootkit", "perl", "sqlattack",
         "xterm", "ps"], "u2r"),
}


def _rows(text: str) -> list[list[str]]:
    return [row for row in csv.reader(text.splitlines()) if row]


def convert_sonar(texts: list[str]) -> tuple[list[str], list[list[str]]]:
    rows = _rows(texts[0])
    header = [f"attr_{i}" for i in range(60)] + ["class"]
    return header, rows


def convert_spectf(texts: list[str]) -> tuple[list[str], list[list[str]]]:
    rows = []
    for text in texts:  # label is the first field in the source files
        rows.extend([r[1:] + [r[0]] for r in _rows(text)])
    header = [f"f{i}" for i in range(44)] + ["class"]
    return header, rows


def convert_soybean(texts: list[str]) -> tuple[list[str], list[list[str]]]:
    rows = [r[1:] + [r[0]] for r in _rows(texts[0])]
    header = [f"a{i}" for i in range(35)] + ["class"]
    return header, rows


def convert_nslkdd(texts: list[str]) -> tuple[list[str], list[list[str]]]:
    rows = []
    for r in _rows(texts[0]):
        features, label = r[:41], r[41]  # drop the trailing difficulty score
        rows.append(features + [ATTACK_CATEGORY.get(label, label)])
    return NSL_KDD_COLUMNS + ["class"], rows


CONVERTERS = {
    "sonar": convert_sonar,
    "spectf": convert_spectf,
    "soybean": convert_soybean,
    "nslkdd": convert_nslkdd,
}


def fetch(name: str, out_dir: Path) -> Path:
    texts = []
    for url in SOURCES[name]:
        print(f"  downloading {url}")
        with urllib.request.urlopen(url, timeout=60) as response:
            texts.append(response.read().decode("utf-8"))
    header, rows = CONVERTERS[name](texts)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"  wrote {path} ({len(rows)} rows)")
    return path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", nargs="+", choices=sorted(SOURCES), help="subset to fetch")
    parser.add_argument("--out", default=Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    failures = []
    for name in args.only or sorted(SOURCES):
        print(f"{name}:")
        try:
            fetch(name, Path(args.out))
        except Exception as exc:  # keep going; report at the end
            print(f"  FAILED: {exc}")
            failures.append(name)
    if failures:
        print(f"failed: {', '.join(failures)}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
