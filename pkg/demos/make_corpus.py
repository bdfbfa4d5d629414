"""Regenerate the bundled verification corpus (20 seeded random real potentials)."""

import json
import sys
from pathlib import Path

from nlsmkdv.verify import corpus_to_json, generate_corpus

target = Path(__file__).resolve().parents[1] / "src" / "nlsmkdv" / "data" / "corpus.json"
seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
target.write_text(json.dumps(corpus_to_json(generate_corpus(seed)), indent=1) + "\n")
print(f"wrote {target}")
