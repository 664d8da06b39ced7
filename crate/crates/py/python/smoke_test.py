"""Exercise the extension against the bundled fixtures."""

import json
import sys
import tempfile
from pathlib import Path

import lgtables

FIXTURES = Path(__file__).resolve().parents[2] / "core" / "fixtures"


def main() -> int:
    label = lgtables.parse_label("N0 V N1 (E+en V-n)")
    assert label.kind == "construction", label.kind
    assert label.expansions() == ["N0 V N1", "N0 V N1 en V-n"]
    assert lgtables.Label(label.canonical) == label
    try:
        lgtables.parse_label("N0 V (N1+")
    except lgtables.LgtError as e:
        print("syntax error:", e)
    else:
        raise AssertionError("bad label accepted")

    pristine = lgtables.TableSet.load(FIXTURES / "pristine" / "tables", FIXTURES / "pristine" / "definitions.txt")
    errors = [i for i in pristine.validate() if i[0] == "error"]
    assert any(e[1].startswith("35L:") for e in errors), errors
    assert pristine.coding("35S", "rompre", "Prép =: avec") == "+"

    script = (FIXTURES / "normalize.lgt").read_text(encoding="utf-8")
    normalized, report = pristine.apply_script(script)
    steps = [json.loads(line) for line in report.splitlines()]
    assert len(steps) > 50, len(steps)
    assert not [i for i in normalized.validate() if i[0] == "error"]
    assert "32D" in normalized.class_ids()

    expected = FIXTURES / "expected" / "lexicon.lglex"
    exported = normalized.export("structured")
    assert exported == expected.read_text(encoding="utf-8")
    assert len(lgtables.read_structured(exported)) == len(normalized.records())

    try:
        pristine.apply_script('promote 35S "Prép =: de"\n')
    except lgtables.ScriptError as e:
        _, step, line = e.args
        assert (step, line) == (1, 1), e.args
    else:
        raise AssertionError("failing step accepted")

    with tempfile.TemporaryDirectory() as tmp:
        normalized.save(tmp)
        again = lgtables.TableSet.load(Path(tmp) / "tables", Path(tmp) / "definitions.txt")
        assert again.export() == exported

    print(normalized)
    print(normalized.stats().splitlines()[0])
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
