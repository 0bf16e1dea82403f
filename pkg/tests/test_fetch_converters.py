"""The dataset fetch script's format converters, checked on inline samples
(the downloads themselves need a networked machine)."""

import importlib.util
import sys
from pathlib import Path

spec = importlib.util.spec_from_file_location(
    "fetch_datasets", Path(__file__).resolve().parent.parent / "scripts" / "fetch_datasets.py"
)
fetch_datasets = importlib.util.module_from_spec(spec)
sys.modules["fetch_datasets"] = fetch_datasets
spec.loader.exec_module(fetch_datasets)


def test_sonar_converter_appends_class_header():
    text = ",".join(["0.1"] * 60 + ["R"]) + "\n" + ",".join(["0.2"] * 60 + ["M"]) + "\n"
    header, rows = fetch_datasets.convert_sonar([text])
    assert len(header) == 61 and header[-1] == "class"
    assert rows[0][-1] == "R" and rows[1][-1] == "M"


def test_spectf_converter_moves_label_last_and_concatenates():
    train = "1," + ",".join(["10"] * 44) + "\n"
    test = "0," + ",".join(["20"] * 44) + "\n"
    header, rows = fetch_datasets.convert_spectf([train, test])
    assert len(header) == 45 and header[-1] == "class"
    assert rows[0][-1] == "1" and rows[0][0] == "10"
    assert rows[1][-1] == "0" and rows[1][0] == "20"
    assert len(rows) == 2


def test_soybean_converter_moves_label_last():
    text = "brown-spot," + ",".join(["?"] + ["2"] * 34) + "\n"
    header, rows = fetch_datasets.convert_soybean([text])
    assert len(header) == 36 and header[-1] == "class"
    assert rows[0][-1] == "brown-spot" and rows[0][0] == "?"


def test_nslkdd_converter_groups_attacks_and_drops_difficulty():
    line1 = ",".join(["0", "tcp", "http", "SF"] + ["1"] * 37 + ["neptune", "21"])
    line2 = ",".join(["0", "udp", "dns", "SF"] + ["2"] * 37 + ["normal", "15"])
    header, rows = fetch_datasets.convert_nslkdd([line1 + "\n" + line2 + "\n"])
    assert len(header) == 42 and header[-1] == "class"
    assert len(rows[0]) == 42
    assert rows[0][-1] == "dos"
    assert rows[1][-1] == "normal"
