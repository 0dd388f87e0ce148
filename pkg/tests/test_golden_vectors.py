"""Byte-identity against the committed independent-oracle golden vectors.

The fixtures were produced by tools/make_golden_vectors.py, a direct
(non-separable) implementation sharing no code with the library resampler.
"""

import json
from pathlib import Path

import pytest

from scalesteg import ChannelSpec, load_image, resize

GOLDEN = Path(__file__).parent / "fixtures" / "golden"
CASES = json.loads((GOLDEN / "cases.json").read_text())


def _case_id(case):
    s = case["spec"]
    aa = "aa-" if s["antialiasing"] else ""
    return f"{case['input'].split('/')[-1]}-{aa}{s['family']}@{s['sf']}"


@pytest.mark.parametrize("case", CASES, ids=_case_id)
def test_golden_byte_identity(case):
    src = load_image(GOLDEN / case["input"])
    spec = ChannelSpec.from_json_obj(case["spec"])
    expected = load_image(GOLDEN / case["expected"])
    assert resize(src, spec) == expected


def test_corpus_covers_all_channels_and_sfs():
    combos = {(c["spec"]["family"], c["spec"]["antialiasing"], c["spec"]["sf"]) for c in CASES}
    assert len(combos) == 15  # 5 channels x 3 scaling factors
    assert len(CASES) == 150  # x 10 images
