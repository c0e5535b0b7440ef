"""Regenerate the bundled synthetic test logs and their golden fit table.

Run ``python -m hsakit.fixtures [DIR]``.  The logs are noiseless
stepped-twist cycling tests generated from bundled table constants, so
fitting them must return those constants; ``manifest.json`` records every
generator setting so the files can be rebuilt bit for bit.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path


from . import io as hio
from .design_space import builtin_spec, parse_design_id
from .fitting import fit_record
from .synthetic import generate_cycle_log

FIXTURE_DESIGNS = ("closed-4", "closed-8")
FIXTURE_THETAS = tuple(range(0, 181, 30))
FIXTURE_SETTINGS = {"cycles": 10, "sample_rate": 50.0, "speed": 20.0, "noise": 0.0,
                    "seed": 0, "torque_coupling": 0.5}
GOLDEN_TABLE = "synthetic_fit.ini"


def default_dir() -> Path:
    return hio.bundled("logs")


def build(directory=None) -> dict:
    out = Path(directory) if directory is not None else default_dir()
    out.mkdir(parents=True, exist_ok=True)
    table = hio.read_parameter_table()
    manifest = {"source_table": "closed_fits.ini", "thetas_deg": list(FIXTURE_THETAS),
                "settings": FIXTURE_SETTINGS, "logs": {}}
    fits = {}
    for ident in FIXTURE_DESIGNS:
        spec = builtin_spec(*parse_design_id(ident))
        record = generate_cycle_log(table[ident], spec.printed_length, FIXTURE_THETAS,
                                    (spec.cycling_min, spec.cycling_max), design=ident, **FIXTURE_SETTINGS)
        path = out / f"{ident}.csv"
        hio.write_test_log(record, path)
        manifest["logs"][path.name] = {"design": ident, "printed_length_mm": spec.printed_length,
                                       "cycling_range_mm": [spec.cycling_min, spec.cycling_max],
                                       "samples": len(record)}
        # fit from the file as written, exactly as ``hsakit fit`` would
        fits[ident] = fit_record(hio.parse_test_log(path, design=ident), spec.printed_length,
                                 design=spec.design(), name=ident)
    hio.write_parameter_table(fits, out / GOLDEN_TABLE)
    with hio.atomic_write(out / "manifest.json") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


if __name__ == "__main__":
    build(sys.argv[1] if len(sys.argv) > 1 else None)
