#!/usr/bin/env python3
"""Assemble GeoNames dump files into data/geonames/.

Preferred source is download.geonames.org. When it is unreachable the files
are recovered from PyPI packages that ship GeoNames snapshots:

  geotext 0.4.0   -> cities15000.txt, countryInfo.txt (verbatim)
  mordecai 2.1.0  -> admin1CodesASCII.json (code -> ascii name)

The admin1 file is written in the admin1CodesASCII.txt column layout
(code, name, asciiname, geonameid); the geonameid column is left empty.
"""
import io
import json
import subprocess
import sys
import tarfile
import tempfile
import urllib.request
import zipfile
from pathlib import Path

DUMP = "https://download.geonames.org/export/dump/"
OUT = Path(__file__).resolve().parent.parent / "data" / "geonames"


def try_direct():
    try:
        for name in ("countryInfo.txt", "admin1CodesASCII.txt"):
            data = urllib.request.urlopen(DUMP + name, timeout=20).read()
            (OUT / name).write_bytes(data)
        data = urllib.request.urlopen(DUMP + "cities15000.zip", timeout=60).read()
        with zipfile.ZipFile(io.BytesIO(data)) as z:
            (OUT / "cities15000.txt").write_bytes(z.read("cities15000.txt"))
        return True
    except Exception as exc:  # noqa: BLE001
        print(f"direct download failed: {exc}", file=sys.stderr)
        return False


def from_pypi():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for pkg in ("geotext==0.4.0", "mordecai==2.1.0"):
            subprocess.run(
                [sys.executable, "-m", "pip", "download", pkg, "--no-deps",
                 "-q", "-d", str(tmp)],
                check=True,
            )
        whl = next(tmp.glob("geotext-*.whl"))
        with zipfile.ZipFile(whl) as z:
            for name in ("cities15000.txt", "countryInfo.txt"):
                (OUT / name).write_bytes(z.read(f"geotext/data/{name}"))
        sdist = next(tmp.glob("mordecai-*.tar.gz"))
        with tarfile.open(sdist) as t:
            member = next(m for m in t.getmembers()
                          if m.name.endswith("admin1CodesASCII.json"))
            admin1 = json.load(t.extractfile(member))
        lines = [f"{code}\t{name}\t{name}\t\n" for code, name in sorted(admin1.items())]
        (OUT / "admin1CodesASCII.txt").write_text("".join(lines), encoding="utf-8")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    if not try_direct():
        from_pypi()
    for p in sorted(OUT.iterdir()):
        print(p.name, p.stat().st_size)
