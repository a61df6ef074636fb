"""Config-driven experiment pipeline: schema validation and report production."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from . import bounds as bnd
from .applications import certified_coefficients, make_family
from .applications.bagging import draw_subsamples, max_multiplicity, multiplicity_bound
from .complexity import (EXACT_CAP, dd_rademacher_exact, dd_rademacher_mc, sampled_u_transductive,
                         union_rademacher)
from .core import DiscreteDistribution, LossFunction, SeededRng, draw_indices, make_loss
from .stability import stability_report

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """The experiment config does not satisfy the schema or is inconsistent."""


def load_schema(name: str = "experiment") -> dict:
    text = resources.files("hssbench").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_config(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, load_schema("experiment"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    if cfg["family"]["name"] != "bagging" and any(e["kind"] == "multiplicity" for e in cfg.get("estimators", [])):
        raise ConfigError("the multiplicity estimator applies to the bagging family only")
    if cfg.get("bound", {}).get("kind") == "theorem1" and "n" not in cfg:
        raise ConfigError("theorem1 needs the ghost-sample size n")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return validate_config(cfg)


@dataclass
class Experiment:
    cfg: dict
    threads: Optional[int] = None
    D: DiscreteDistribution = field(init=False)
    loss: LossFunction = field(init=False)
    rng: SeededRng = field(init=False)

    def __post_init__(self):
        validate_config(self.cfg)
        self.D = DiscreteDistribution.from_dict(self.cfg["distribution"])
        lcfg = self.cfg.get("loss", {"kind": "absolute-clipped"})
        self.loss = make_loss(lcfg["kind"], lcfg.get("mu"))
        self.rng = SeededRng(self.cfg["seed"])
        fam = self.cfg["family"]
        self.family = make_family(fam["name"], fam.get("params"))

    @property
    def m(self) -> int:
        return self.cfg["m"]

    def _samples(self, key: int, count: int, sizes) -> list:
        gen = self.rng.child(key).generator()
        return [[self.D.support.take(draw_indices(self.D, s, gen)) for s in sizes] for _ in range(count)]

    # -- estimators --------------------------------------------------------
    def estimate(self, index: int, spec: dict):
        kind = spec["kind"]
        rng = self.rng.child(100 + index)
        if kind == "dd_rademacher":
            out = []
            for k, (S, T) in enumerate(self._samples(200 + index, spec.get("n_pairs", 1), (self.m, self.m))):
                if spec.get("exact", False):
                    if self.m > EXACT_CAP:
                        raise ConfigError(f"exact enumeration is capped at m={EXACT_CAP}")
                    out.append(dd_rademacher_exact(self.family, S, T, self.loss, spec.get("target", "loss")))
                else:
                    out.append(dd_rademacher_mc(self.family, S, T, self.loss, spec.get("n_draws", 4096),
                                                rng.child(k), spec.get("target", "loss"), self.threads))
            return "estimates", out
        if kind == "union_rademacher":
            out = []
            for k, (S, T) in enumerate(self._samples(200 + index, spec.get("n_pairs", 1), (self.m, self.m))):
                out.append(union_rademacher(self.family, S, T, self.loss, spec.get("subsample_count", 8),
                                            spec.get("n_draws"), rng.child(k), spec.get("target", "loss"),
                                            self.threads))
            return "estimates", out
        if kind == "transductive":
            n = self.cfg.get("n", self.m)
            rep = sampled_u_transductive(self.family, self.D, self.m, n, self.loss, spec.get("n_u", 4),
                                         spec.get("max_subsamples", 16), spec.get("n_draws", 4096), rng,
                                         self.threads)
            return "estimates", [rep]
        if kind == "stability":
            rep = stability_report(self.family, self.D, self.m, spec.get("n_samples", 4),
                                   spec.get("n_perturbations", 20), rng, self.loss,
                                   spec.get("exhaustive", False))
            return "stability", [rep]
        if kind == "multiplicity":
            return "multiplicity", [self.multiplicity(spec.get("n_seeds", 1000), rng)]
        raise ConfigError(f"unknown estimator {kind!r}")

    def multiplicity(self, n_seeds: int, rng: SeededRng) -> dict:
        params = self.cfg["family"].get("params", {})
        k, p = params.get("k", 10), params.get("p", 5)
        delta = self.cfg.get("delta", params.get("delta", 0.05))
        t = multiplicity_bound(k, p, self.m, delta)
        mults = np.array([max_multiplicity(draw_subsamples(k, p, self.m, rng.child(s)), self.m)
                          for s in range(n_seeds)])
        frac = float(np.mean(mults <= t))
        slack = 3 * math.sqrt(delta * (1 - delta) / n_seeds)
        return {"type": "MultiplicityReport", "k": k, "p": p, "m": self.m, "delta": delta, "t": t,
                "n_seeds": n_seeds, "pass_fraction": frac, "max_observed": int(mults.max()),
                "required_fraction": 1 - delta - slack, "holds": frac >= 1 - delta - slack}

    # -- bounds ------------------------------------------------------------
    def bound_inputs(self) -> bnd.BoundInputs:
        """Given inputs, then family certificates, then plug-in estimates for anything still missing."""
        bcfg = self.cfg["bound"]
        fam = self.cfg["family"]
        delta = self.cfg.get("delta", 0.05)
        mu = self.loss.lipschitz_mu
        given = certified_coefficients(fam["name"], fam.get("params", {}), self.m, delta, mu)
        given.update({k: (math.inf if v is None else v) for k, v in bcfg.get("inputs", {}).items()})
        n = self.cfg.get("n", 0) if bcfg["kind"] == "theorem1" else 0
        if bcfg["kind"] == "theorem1":
            ready = "trans_rad" in given
        elif bcfg["kind"] == "fv":
            ready = "gamma_fv" in given
        else:
            ready = "beta" in given and any(k in given for k in ("rad", "chi", "chi_bar", "delta_max"))
        if ready:
            return bnd.BoundInputs(m=self.m, n=n, delta=delta, **given)
        est = bnd.estimate_bound_inputs(self.family, self.D, self.m, delta, self.rng.child(300), self.loss, n=n,
                                        beta=given.get("beta"))
        merged = {k: getattr(est, k) for k in ("beta", "chi", "chi_bar", "delta_max", "rad", "trans_rad",
                                               "gamma_fv")}
        merged.update(given)
        return bnd.BoundInputs(m=self.m, n=n, delta=delta, **merged)

    def bound(self, inputs: bnd.BoundInputs):
        kind = bnd.BoundKind(self.cfg["bound"]["kind"])
        if kind == bnd.BoundKind.THEOREM1:
            return {"type": "Theorem1Bound", "value": bnd.theorem1_bound(inputs), "inputs": inputs.to_dict()}
        if kind == bnd.BoundKind.FV:
            return {"type": "FVBound", "value": bnd.fv_bound(inputs.gamma_fv, inputs.m, inputs.delta),
                    "inputs": inputs.to_dict()}
        return bnd.theorem2_bound(inputs)

    def coverage(self, inputs: bnd.BoundInputs):
        return bnd.validate_bound_coverage(self.family, self.D, self.cfg["bound"]["kind"], self.m, inputs.delta,
                                           self.cfg["n_trials"], self.rng.child(400), inputs, self.loss,
                                           n=inputs.n or None, threads=self.threads)

    def run(self, parts=("estimates", "stability", "multiplicity", "bound", "coverage")) -> dict:
        """Reports grouped by category; categories absent from ``parts`` are skipped."""
        out: dict = {}
        for i, spec in enumerate(self.cfg.get("estimators", [])):
            cat = {"stability": "stability", "multiplicity": "multiplicity"}.get(spec["kind"], "estimates")
            if cat in parts:
                log.info("estimator %d: %s", i, spec["kind"])
                cat, reps = self.estimate(i, spec)
                out.setdefault(cat, []).extend(reps)
        want_bound = "bound" in parts and "bound" in self.cfg
        want_cov = "coverage" in parts and "bound" in self.cfg and "n_trials" in self.cfg
        if want_bound or want_cov:
            inputs = self.bound_inputs()
            if want_bound:
                out["bound"] = [self.bound(inputs)]
            if want_cov:
                log.info("coverage over %d trials", self.cfg["n_trials"])
                out["coverage"] = [self.coverage(inputs)]
        return out

