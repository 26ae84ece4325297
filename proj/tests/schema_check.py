"""Validates shipped profiles and session-script controls against schema/."""

import json
import pathlib
import sys

from jsonschema import Draft202012Validator, ValidationError
from referencing import Registry, Resource


def main(root):
    root = pathlib.Path(root)
    ps = json.loads((root / "schema/profile.schema.json").read_text())
    cs = json.loads((root / "schema/control.schema.json").read_text())
    reg = Registry().with_resources(
        [(s["$id"], Resource.from_contents(s)) for s in (ps, cs)])
    for s in (ps, cs):
        Draft202012Validator.check_schema(s)
    pv = Draft202012Validator(ps, registry=reg)
    cv = Draft202012Validator(cs, registry=reg)

    failures = 0
    files = sorted((root / "profiles").glob("*.vsim.json"))
    files += sorted((root / "fixtures").rglob("*.vsim.json"))
    for f in files:
        errs = list(pv.iter_errors(json.loads(f.read_text())))
        print(("ok  " if not errs else "BAD ") + str(f.relative_to(root)))
        failures += bool(errs)

    script = json.loads((root / "fixtures/protocol/session_script.json").read_text())
    for step in script["steps"]:
        if "send_text" not in step:
            continue
        msg = step["send_text"]
        # Unknown message types must fall outside the schema.
        want_valid = step["expect"].get("code") != "unknown_type"
        valid = cv.is_valid(msg)
        print(("ok  " if valid == want_valid else "BAD ") + "control " + step["name"])
        failures += valid != want_valid

    bad = {"cvd": {"severity": 1.5}}
    try:
        pv.validate(bad)
        print("BAD out-of-range severity accepted")
        failures += 1
    except ValidationError:
        print("ok  out-of-range severity rejected")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
