"""Experiment configuration: flat INI files with exact rational weights.

Weights are written as "a/b" tokens, rows separated by ";", so a config
round-trips losslessly and the resolved copy emitted next to results is
diff-friendly.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BadShape
from .symbolic import BernoulliSpec, build_spec


def _parse_weights(text: str, m: int, n: int) -> list[list[Fraction]]:
    rows = [row.strip() for row in text.split(";") if row.strip()]
    if len(rows) != m:
        raise BadShape(f"expected {m} weight rows, got {len(rows)}")
    out = []
    for row in rows:
        toks = row.split()
        if len(toks) != n:
            raise BadShape(f"expected {n} entries per row, got {len(toks)}")
        out.append([Fraction(t) for t in toks])
    return out


def format_weights(weights) -> str:
    return " ; ".join(" ".join(str(Fraction(x)) for x in row) for row in weights)


@dataclass
class ExperimentConfig:
    m: int
    n: int
    weights: list[list[Fraction]]
    seed: int = 0
    precision: int = 256
    threads: int = 1
    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    def spec(self) -> BernoulliSpec:
        return build_spec(self.m, self.n, self.weights)

    def param(self, section: str, key: str, default=None, cast=str):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)

    # -- serialization -------------------------------------------------------

    @staticmethod
    def parse(text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        if "spec" not in cp:
            raise BadShape("config needs a [spec] section")
        m = cp.getint("spec", "m")
        n = cp.getint("spec", "n")
        weights = _parse_weights(cp.get("spec", "weights"), m, n)
        run = cp["run"] if "run" in cp else {}
        sections = {
            name: dict(cp[name]) for name in cp.sections()
            if name not in ("spec", "run")
        }
        return ExperimentConfig(
            m=m,
            n=n,
            weights=weights,
            seed=int(run.get("seed", 0)),
            precision=int(run.get("precision", 256)),
            threads=int(run.get("threads", 1)),
            sections=sections,
        )

    @staticmethod
    def load(path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.parse(fh.read())

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write("[spec]\n")
        buf.write(f"m = {self.m}\n")
        buf.write(f"n = {self.n}\n")
        buf.write(f"weights = {format_weights(self.weights)}\n")
        buf.write("\n[run]\n")
        buf.write(f"seed = {self.seed}\n")
        buf.write(f"precision = {self.precision}\n")
        buf.write(f"threads = {self.threads}\n")
        for name in sorted(self.sections):
            buf.write(f"\n[{name}]\n")
            for key in sorted(self.sections[name]):
                buf.write(f"{key} = {self.sections[name][key]}\n")
        return buf.getvalue()

    def spec_hash(self) -> str:
        canon = f"{self.m}|{self.n}|{format_weights(self.weights)}"
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def config_hash(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]
