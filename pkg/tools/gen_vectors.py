"""Regenerate the shared teleop codec vectors.

Floats are kept in a range where Python's repr and JavaScript's number
formatting agree (plain decimal notation, no exponents, no negative zero),
so the same file asserts byte-exact round-trips in both codecs.
"""

import json
import random
import sys

sys.path.insert(0, "src")

from claw.teleop import Bye, Command, Feedback, Hello, encode  # noqa: E402

MODES = ("free", "half_lock", "full_lock")


def safe_float(rng: random.Random) -> float:
    v = round(rng.uniform(-999.0, 999.0), 6)
    return 0.0 if v == 0 else v


def main(path: str, count: int = 200) -> None:
    rng = random.Random(20260809)
    lines = []
    seq = 0
    for i in range(count):
        kind = rng.choice(("command", "feedback", "hello", "bye"))
        if kind == "command":
            seq += rng.randint(1, 5)
            msg = Command(seq=seq, t=abs(safe_float(rng)),
                          pose=tuple(safe_float(rng) for _ in range(6)),
                          mode=rng.choice(MODES))
        elif kind == "feedback":
            seq += rng.randint(1, 5)
            msg = Feedback(seq=seq, t=abs(safe_float(rng)),
                           wrench=tuple(safe_float(rng) for _ in range(6)),
                           estop=rng.random() < 0.2)
        elif kind == "hello":
            msg = Hello(spec_version=1, role=rng.choice(("leader", "observer", "follower")))
        else:
            msg = Bye(reason=rng.choice(("stream ended", "commander-conflict", "version-mismatch")))
        lines.append(encode(msg).decode().rstrip("\n"))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"description": "teleop codec round-trip vectors", "lines": lines}, fh, indent=1)
        fh.write("\n")
    print(f"{len(lines)} vectors -> {path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/vectors/teleop_vectors.json")
