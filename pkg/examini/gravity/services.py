"""
Gravity driver: rank-parallel force walks with accuracy and interaction accounting
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..core.config import settings
from ..core.errors import GravityError
from ..core.ranks import RankContext, run_ranks
from ..tracing.io import write_trace
from ..tracing.models import TraceTimeline
from ..tracing.recorder import RecorderSet
from .models import Bodies, GravityConfig
from .sph import find_hsml, sph_density
from .tree import audit_tree, build_tree
from .walks import bh_force, direct_sum, grouped_walk_force, relative_error


def make_bodies(config: GravityConfig) -> Bodies:
    """Equal-mass cloud of unit radius (sphere) or unit side (cube), total mass 1"""
    rng = np.random.default_rng(config.seed)
    n = config.n_bodies
    if config.distribution == "uniform_cube":
        pos = rng.random((n, 3))
    else:
        direction = rng.normal(size=(n, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        pos = direction * rng.random(n)[:, None] ** (1.0 / 3.0)
    return Bodies(pos, np.full(n, 1.0 / n))


@dataclass
class GravityRunResult:
    bodies: Bodies                   # tree (Hilbert) order
    acc: np.ndarray
    reference: np.ndarray
    errors: pd.DataFrame
    counters: pd.DataFrame
    timeline: TraceTimeline
    config: GravityConfig
    audit: Dict[str, Any]
    hsml: Optional[np.ndarray] = None
    density: Optional[np.ndarray] = None

    def error_summary(self) -> Dict[str, float]:
        err = self.errors["relative_error"]
        return {"median": float(err.median()), "p99": float(err.quantile(0.99)), "max": float(err.max())}


def run_gravity(config: GravityConfig, ranks: int = 1, workers: Optional[int] = None,
                bodies: Optional[Bodies] = None, reference: bool = True) -> GravityRunResult:
    """Build the tree once per rank, then walk disjoint Hilbert-contiguous body ranges in parallel

    `reference=False` skips the direct-summation oracle (timing runs); the error table is then empty.
    """
    config.validate()
    bodies = make_bodies(config) if bodies is None else bodies
    if ranks < 1 or ranks > len(bodies):
        raise GravityError(f"cannot split {len(bodies)} bodies over {ranks} ranks")
    recorders = RecorderSet(ranks)
    params = config.params
    logger.info(f"Gravity run: n={len(bodies)} walk={config.walk} theta={params.theta} "
                f"group_size={params.group_size} ranks={ranks}")

    def body(ctx: RankContext) -> Optional[Dict[str, Any]]:
        with ctx.region("tree_build"), ctx.compute():
            tree = build_tree(bodies, leaf_capacity=config.leaf_capacity, order=config.key_order)
        bounds = np.linspace(0, len(tree.bodies), ctx.size + 1).astype(int)
        members = np.arange(bounds[ctx.rank], bounds[ctx.rank + 1])
        local = tree.bodies.take(members)

        counters: List[Dict[str, Any]] = []
        with ctx.region("force_walk"), ctx.compute():
            if config.walk == "grouped":
                pairs: List = []
                acc = grouped_walk_force(tree, local, params, counters=pairs)
                counters = [{"rank": ctx.rank, "group": g, "list_length": length, "members": size}
                            for g, (length, size) in enumerate(pairs)]
            else:
                lengths: List[int] = []
                acc = bh_force(tree, local, params, counters=lengths)
                counters = [{"rank": ctx.rank, "group": g, "list_length": length, "members": 1}
                            for g, length in enumerate(lengths)]

        exact = np.full_like(acc, np.nan)
        if reference:
            with ctx.region("direct_sum"), ctx.compute():
                exact = direct_sum(tree.bodies, params.softening, targets=local)

        hsml = density = None
        if config.sph is not None:
            with ctx.region("find_hsml"), ctx.compute():
                hsml = find_hsml(local, config.sph, tree=tree)
                density = sph_density(local, hsml, tree=tree)

        gathered = ctx.gather({"acc": acc, "reference": exact, "counters": counters,
                               "hsml": hsml, "density": density})
        if gathered is None:
            return None
        merged: Dict[str, Any] = {
            "bodies": tree.bodies, "audit": audit_tree(tree, bodies),
            "acc": np.concatenate([g["acc"] for g in gathered]),
            "reference": np.concatenate([g["reference"] for g in gathered]),
            "counters": [row for g in gathered for row in g["counters"]],
        }
        if config.sph is not None:
            merged["hsml"] = np.concatenate([g["hsml"] for g in gathered])
            merged["density"] = np.concatenate([g["density"] for g in gathered])
        return merged

    results, _ = run_ranks(ranks, body, workers=workers, recorders=recorders)
    root = results[0]
    active = root["bodies"].active if reference else np.zeros(len(root["bodies"]), dtype=bool)
    errors = pd.DataFrame({
        "id": root["bodies"].ids[active],
        "relative_error": relative_error(root["acc"][active], root["reference"][active]),
    })
    return GravityRunResult(
        bodies=root["bodies"], acc=root["acc"], reference=root["reference"], errors=errors,
        counters=pd.DataFrame(root["counters"], columns=["rank", "group", "list_length", "members"]),
        timeline=recorders.finalize(), config=config, audit=root["audit"],
        hsml=root.get("hsml"), density=root.get("density"),
    )


class GravityService:
    """Service class for gravity accuracy runs"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir or settings.OUTPUT_DIR)

    def run(self, config: GravityConfig, ranks: int = 1, workers: Optional[int] = None,
            stem: str = "gravity", save: bool = True) -> Dict[str, Any]:
        result = run_gravity(config, ranks=ranks, workers=workers)
        paths: Dict[str, str] = {}
        if save:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            error_path = self.output_dir / f"{stem}_errors.csv"
            counter_path = self.output_dir / f"{stem}_interactions.csv"
            result.errors.to_csv(error_path, index=False)
            result.counters.to_csv(counter_path, index=False)
            trace_path = write_trace(result.timeline, self.output_dir / f"{stem}_trace.jsonl")
            paths = {"errors": str(error_path), "interactions": str(counter_path), "trace": str(trace_path)}
            if result.hsml is not None:
                sph_path = self.output_dir / f"{stem}_sph.csv"
                pd.DataFrame({"id": result.bodies.ids, "hsml": result.hsml, "density": result.density}).to_csv(
                    sph_path, index=False)
                paths["sph"] = str(sph_path)

        summary = result.error_summary()
        logger.info(f"Gravity errors: median={summary['median']:.3e} max={summary['max']:.3e}")
        return {
            "status": "completed" if result.audit["status"] == "ok" else "failed",
            "bodies": len(result.bodies),
            "walk": config.walk,
            "errors": summary,
            "mean_list_length": float(result.counters["list_length"].mean()) if len(result.counters) else 0.0,
            "audit": result.audit,
            "paths": paths,
            "result": result,
        }


def get_gravity_service(output_dir: Optional[Union[str, Path]] = None) -> GravityService:
    """Dependency injection for gravity service"""
    return GravityService(output_dir)
