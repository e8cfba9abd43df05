"""
MHD run driver and service
"""

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..core.config import settings
from ..core.dumps import write_dump
from ..core.errors import MhdError
from ..core.ranks import RankContext, run_ranks
from ..tracing.io import write_trace
from ..tracing.metrics import region_times
from ..tracing.models import TraceTimeline
from ..tracing.recorder import RecorderSet
from .integrator import MhdSolver, rk3_step
from .models import PRIM_NAMES, FaceB, GridSpec, MhdConfig
from .physics import cons_to_prim_floored
from .problems import build_problem, initial_state

HISTORY_COLUMNS = [
    "step", "time", "dt", "mass", "momentum_x", "momentum_y", "momentum_z", "energy", "max_divb",
    "pressure_floors", "hlld_fallbacks",
]

SnapshotHook = Callable[[int, float, np.ndarray, Optional[FaceB]], None]


@dataclass
class MhdRunResult:
    """Global fields gathered on rank 0 plus history, trace and timings"""
    cons: np.ndarray
    faces: Optional[FaceB]
    time: float
    steps: int
    history: pd.DataFrame
    timeline: TraceTimeline
    timings: Dict[str, float]
    grid: GridSpec
    config: MhdConfig
    counters: Dict[str, int] = field(default_factory=dict)

    @property
    def prim(self) -> np.ndarray:
        return cons_to_prim_floored(self.cons, self.config.gamma, self.config.pressure_floor)[0]


def _assemble(grid: GridSpec, blocks: List[List[np.ndarray]]) -> List[np.ndarray]:
    """Place every rank's owned blocks into global arrays"""
    local = grid.local_cells
    merged = []
    for index, first in enumerate(blocks[0]):
        lead = first.shape[:-3]
        out = np.empty(lead + tuple(grid.global_cells))
        for rank, arrays in enumerate(blocks):
            lo = grid.offsets(rank)
            target = (Ellipsis,) + tuple(slice(o, o + n) for o, n in zip(lo, local))
            out[target] = arrays[index]
        merged.append(out)
    return merged


def _gather_global(ctx: RankContext, grid: GridSpec, arrays: List[np.ndarray]) -> Optional[List[np.ndarray]]:
    owned = (Ellipsis,) + grid.owned()
    blocks = [a[owned] for a in arrays]
    gathered = ctx.gather(blocks)
    if gathered is None:
        return None
    return _assemble(grid, gathered)


def _global_faces(merged: List[np.ndarray]) -> Optional[FaceB]:
    return FaceB(*merged[1:4]) if len(merged) > 1 else None


def run_mhd(config: MhdConfig, grid: GridSpec, ranks: Optional[int] = None, workers: Optional[int] = None,
            snapshot: Optional[SnapshotHook] = None) -> MhdRunResult:
    """Advance the configured problem with one logical rank per block

    `ranks` overrides the grid's rank layout with a minimum-surface layout of that many blocks.
    `snapshot(step, time, cons, faces)` receives gathered global fields every `dump_every` steps.
    """
    config.validate()
    if ranks is not None and ranks != grid.ranks:
        grid = grid.relayout(ranks)
    grid.validate()
    problem = build_problem(config, grid)
    recorders = RecorderSet(grid.ranks)

    logger.info(f"MHD run: problem={config.problem} cells={grid.global_cells} ranks={grid.rank_layout} "
                f"divb={config.divb_mode} riemann={config.riemann} max_steps={config.max_steps}")

    def body(ctx: RankContext) -> Optional[Dict[str, Any]]:
        solver = MhdSolver(ctx, grid, config)
        with ctx.region("initialize"), ctx.compute():
            arrays = initial_state(problem, grid, config, ctx.rank).arrays()

        history = [{"step": 0, "time": 0.0, "dt": 0.0, **solver.diagnostics(arrays)}]
        t, step = 0.0, 0
        while step < config.max_steps and t < config.t_end * (1.0 - 1e-12):
            prim = solver.refresh(arrays)
            dt = min(solver.timestep(prim), config.t_end - t)
            try:
                arrays = rk3_step(arrays, dt, solver.rhs)
            except MhdError as exc:
                exc.add_context(step=step + 1, time=t)
                raise
            solver.damp_psi(arrays, dt)
            t += dt
            step += 1
            done = step == config.max_steps or t >= config.t_end * (1.0 - 1e-12)
            if step % config.history_every == 0 or done:
                history.append({"step": step, "time": t, "dt": dt, **solver.diagnostics(arrays)})
            if ctx.rank == 0 and step % 10 == 0:
                logger.debug(f"step {step}: t={t:.6g} dt={dt:.3g}")
            if snapshot is not None and config.dump_every and step % config.dump_every == 0:
                solver.refresh(arrays)
                merged = _gather_global(ctx, grid, arrays)
                if merged is not None:
                    snapshot(step, t, merged[0], _global_faces(merged))

        solver.refresh(arrays)
        merged = _gather_global(ctx, grid, arrays)
        if merged is None:
            return None
        return {"merged": merged, "time": t, "steps": step, "history": history, "counters": dict(solver.counters)}

    start = time.perf_counter()
    results, _ = run_ranks(grid.ranks, body, workers=workers, recorders=recorders)
    walltime = time.perf_counter() - start
    timeline = recorders.finalize()
    root = results[0]

    timings = {"walltime": walltime, **region_times(timeline)}
    history = pd.DataFrame(root["history"], columns=HISTORY_COLUMNS)
    logger.info(f"MHD run finished: {root['steps']} steps, t={root['time']:.6g}, {walltime:.2f} s")
    return MhdRunResult(
        cons=root["merged"][0], faces=_global_faces(root["merged"]), time=root["time"], steps=root["steps"],
        history=history, timeline=timeline, timings=timings, grid=grid, config=config,
        counters={"pressure_floor": int(history["pressure_floors"].iloc[-1]),
                  "hlld_fallback": int(history["hlld_fallbacks"].iloc[-1])},
    )


class MhdService:
    """Service class for MHD benchmark runs and their artifacts"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir or settings.OUTPUT_DIR)

    def _dump(self, stem: str, grid: GridSpec, config: MhdConfig) -> SnapshotHook:
        def hook(step: int, t: float, cons: np.ndarray, faces: Optional[FaceB]) -> None:
            self.write_fields(f"{stem}_{step:06d}", cons, faces, t, grid, config)
        return hook

    def write_fields(self, stem: str, cons: np.ndarray, faces: Optional[FaceB], t: float, grid: GridSpec,
                     config: MhdConfig) -> Dict[str, Path]:
        """Primitive fields (plus the staggered field in CT mode) as a binary dump"""
        prim, _ = cons_to_prim_floored(cons, config.gamma, config.pressure_floor)
        arrays = {name: prim[i] for i, name in enumerate(PRIM_NAMES[:prim.shape[0]])}
        if faces is not None:
            arrays.update({"face_bx": faces.bx, "face_by": faces.by, "face_bz": faces.bz})
        meta = {"time": t, "grid": grid.to_dict(), "problem": config.problem, "gamma": config.gamma,
                "divb_mode": config.divb_mode}
        return write_dump(self.output_dir / stem, arrays, meta)

    def run(self, config: MhdConfig, grid: GridSpec, ranks: Optional[int] = None, workers: Optional[int] = None,
            stem: str = "mhd", save: bool = True) -> Dict[str, Any]:
        snapshot = self._dump(stem, grid, config) if save and config.dump_every else None
        result = run_mhd(config, grid, ranks=ranks, workers=workers, snapshot=snapshot)
        paths: Dict[str, str] = {}
        if save:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            history_path = self.output_dir / f"{stem}_history.csv"
            result.history.to_csv(history_path, index=False)
            trace_path = write_trace(result.timeline, self.output_dir / f"{stem}_trace.jsonl")
            timing_path = self.output_dir / f"{stem}_timings.csv"
            pd.DataFrame(sorted(result.timings.items()), columns=["region", "seconds"]).to_csv(timing_path, index=False)
            dump = self.write_fields(f"{stem}_final", result.cons, result.faces, result.time, result.grid, config)
            paths = {"history": str(history_path), "trace": str(trace_path), "timings": str(timing_path),
                     "fields": str(dump["data"])}

        last = result.history.iloc[-1]
        first = result.history.iloc[0]
        mass_drift = abs(last["mass"] - first["mass"]) / abs(first["mass"]) if first["mass"] else 0.0
        return {
            "status": "completed",
            "steps": result.steps,
            "time": result.time,
            "ranks": result.grid.ranks,
            "max_divb": float(result.history["max_divb"].max()),
            "mass_drift": float(mass_drift),
            "counters": result.counters,
            "timings": result.timings,
            "paths": paths,
            "result": result,
        }


def get_mhd_service(output_dir: Optional[Union[str, Path]] = None) -> MhdService:
    """Dependency injection for MHD service"""
    return MhdService(output_dir)
