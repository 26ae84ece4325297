"""Regenerates fixtures into a temp dir and compares them with the checked-in copies."""

import filecmp
import pathlib
import subprocess
import sys
import tempfile


def main(generator, root):
    root = pathlib.Path(root)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([generator, "--root", tmp], check=True, stdout=subprocess.DEVNULL)
        fresh = sorted(p for p in pathlib.Path(tmp).rglob("*") if p.is_file())
        drift = 0
        for p in fresh:
            rel = p.relative_to(tmp)
            same = (root / rel).is_file() and filecmp.cmp(p, root / rel, shallow=False)
            print(("ok    " if same else "DRIFT ") + str(rel))
            drift += not same
        print(f"{len(fresh)} files, {drift} drifted")
        return 1 if drift or not fresh else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
