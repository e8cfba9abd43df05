"""
PIC cycle driver and service
"""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..core.config import settings
from ..core.dumps import write_dump
from ..core.errors import ConfigError, PicError
from ..core.ranks import RankContext, run_ranks
from ..tracing.io import write_trace
from ..tracing.models import TraceTimeline
from ..tracing.recorder import RecorderSet
from .fields import ImplicitFieldSolver
from .models import KERNELS, FieldGrid, Moments, ParticleSet, PicConfig
from .moments import field_energy, gather_moments, kinetic_energy
from .mover import particle_mover
from .particles import init_maxwellian


@dataclass
class PicRunResult:
    particles: List[ParticleSet]
    fields: FieldGrid
    moments: Moments
    history: pd.DataFrame
    timings: pd.DataFrame
    timeline: TraceTimeline
    config: PicConfig

    def kernel_summary(self) -> pd.DataFrame:
        """Slowest rank per (cycle, kernel)"""
        if self.timings.empty:
            return pd.DataFrame(columns=["cycle", "kernel", "seconds"])
        return self.timings.groupby(["cycle", "kernel"], as_index=False, sort=True)["seconds"].max()


def _owner(x: np.ndarray, width: float, ranks: int) -> np.ndarray:
    return np.clip(np.floor(x / width).astype(np.int64), 0, ranks - 1)


def _migrate(ctx: RankContext, particles: List[ParticleSet], width: float, cycle: int) -> List[ParticleSet]:
    """Counts-then-payload exchange of particles that left this rank's strip"""
    if ctx.size == 1:
        return particles
    owners = [_owner(p.x, width, ctx.size) for p in particles]
    count_tag, payload_tag = 2 * cycle, 2 * cycle + 1
    for dst in range(ctx.size):
        if dst == ctx.rank:
            continue
        outgoing = [p.select(o == dst) for p, o in zip(particles, owners)]
        counts = [len(p) for p in outgoing]
        ctx.send(dst, count_tag, counts)
        if sum(counts):
            ctx.send(dst, payload_tag, [(p.x, p.y, p.v, p.q) for p in outgoing])

    kept = [[p.select(o == ctx.rank)] for p, o in zip(particles, owners)]
    for src in range(ctx.size):
        if src == ctx.rank:
            continue
        counts = ctx.recv(src, count_tag)
        if not sum(counts):
            continue
        payload = ctx.recv(src, payload_tag)
        for s, (x, y, v, q) in enumerate(payload):
            if counts[s]:
                kept[s].append(ParticleSet(x, y, v, q, particles[s].qom, particles[s].species))
    return [ParticleSet.concat(parts) for parts in kept]


def run_pic(config: PicConfig, ranks: int = 1, cycles: Optional[int] = None,
            workers: Optional[int] = None) -> PicRunResult:
    """Run the field / mover / moment cycle with particles split into x strips, one per rank"""
    config.validate()
    cycles = config.cycles if cycles is None else cycles
    if ranks < 1 or config.cells[0] % ranks:
        raise ConfigError(f"{ranks} ranks do not divide {config.cells[0]} cells along x")
    width = config.extent[0] / ranks
    recorders = RecorderSet(ranks)
    qoms = [s.qom for s in config.species]
    logger.info(f"PIC run: cells={config.cells} ppc={config.ppc} species={len(qoms)} ranks={ranks} "
                f"cycles={cycles} dt={config.dt}")

    def body(ctx: RankContext) -> Optional[Dict[str, Any]]:
        with ctx.region("initialize"), ctx.compute():
            everything, fields = init_maxwellian(config)
            particles = [p.select(_owner(p.x, width, ctx.size) == ctx.rank) for p in everything]
        solver = ImplicitFieldSolver(qoms, config.dt, config.theta, config.pressure_term)

        def moments_of(parts: List[ParticleSet]) -> Moments:
            with ctx.compute():
                local = gather_moments(parts, config.cells, config.spacing)
            return ctx.allreduce(local, lambda a, b: a + b)

        def energies(cycle: int, iterations: int) -> Dict[str, float]:
            kinetic = ctx.allreduce(kinetic_energy(particles), lambda a, b: a + b)
            fe = field_energy(fields)
            return {"cycle": cycle, "field_energy": fe, "kinetic_energy": kinetic, "total_energy": fe + kinetic,
                    "gmres_iterations": iterations}

        with ctx.region("GatherMoments"):
            moments = moments_of(particles)
        history = [energies(0, 0)]
        timings: List[Dict[str, Any]] = []

        for cycle in range(1, cycles + 1):
            try:
                elapsed = {}
                start = time.perf_counter()
                with ctx.region(KERNELS[0]), ctx.compute():
                    fields, theta_fields, record = solver.solve(
                        fields, moments, config.gmres_tolerance, config.gmres_restart, config.gmres_max_iters)
                elapsed[KERNELS[0]] = time.perf_counter() - start

                start = time.perf_counter()
                with ctx.region(KERNELS[1]):
                    with ctx.compute():
                        particles = [particle_mover(p, theta_fields, config.dt, config.mover_iterations,
                                                    config.extent) for p in particles]
                    particles = _migrate(ctx, particles, width, cycle)
                elapsed[KERNELS[1]] = time.perf_counter() - start

                start = time.perf_counter()
                with ctx.region(KERNELS[2]):
                    moments = moments_of(particles)
                elapsed[KERNELS[2]] = time.perf_counter() - start
            except PicError as exc:
                exc.add_context(cycle=cycle)
                raise

            timings.extend({"cycle": cycle, "kernel": k, "rank": ctx.rank, "seconds": s} for k, s in elapsed.items())
            history.append(energies(cycle, record.iterations))
            if ctx.rank == 0:
                logger.debug(f"cycle {cycle}: energy {history[-1]['total_energy']:.6e}, "
                             f"{record.iterations} GMRes iterations")

        gathered = ctx.gather({"particles": particles, "timings": timings})
        if gathered is None:
            return None
        merged = [ParticleSet.concat([g["particles"][s] for g in gathered]) for s in range(len(qoms))]
        rows = [row for g in gathered for row in g["timings"]]
        return {"particles": merged, "fields": fields, "moments": moments, "history": history, "timings": rows}

    results, _ = run_ranks(ranks, body, workers=workers, recorders=recorders)
    root = results[0]
    return PicRunResult(
        particles=root["particles"], fields=root["fields"], moments=root["moments"],
        history=pd.DataFrame(root["history"]),
        timings=pd.DataFrame(root["timings"], columns=["cycle", "kernel", "rank", "seconds"]),
        timeline=recorders.finalize(), config=config,
    )


class PicService:
    """Service class for PIC runs and their artifacts"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir or settings.OUTPUT_DIR)

    def checkpoint(self, result: PicRunResult, stem: str) -> Dict[str, Path]:
        arrays: Dict[str, np.ndarray] = {"E": result.fields.e, "B": result.fields.b}
        for p in result.particles:
            arrays.update(p.to_arrays(f"s{p.species}"))
        meta = {"cells": list(result.config.cells), "extent": list(result.config.extent),
                "qom": [s.qom for s in result.config.species], "cycles": int(result.history["cycle"].iloc[-1])}
        return write_dump(self.output_dir / stem, arrays, meta)

    def run(self, config: PicConfig, ranks: int = 1, cycles: Optional[int] = None,
            workers: Optional[int] = None, stem: str = "pic", save: bool = True) -> Dict[str, Any]:
        result = run_pic(config, ranks=ranks, cycles=cycles, workers=workers)
        paths: Dict[str, str] = {}
        if save:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            history_path = self.output_dir / f"{stem}_history.csv"
            timing_path = self.output_dir / f"{stem}_timings.csv"
            result.history.to_csv(history_path, index=False)
            result.timings.to_csv(timing_path, index=False)
            trace_path = write_trace(result.timeline, self.output_dir / f"{stem}_trace.jsonl")
            dump = self.checkpoint(result, f"{stem}_checkpoint")
            paths = {"history": str(history_path), "timings": str(timing_path), "trace": str(trace_path),
                     "checkpoint": str(dump["data"])}

        first, last = result.history.iloc[0], result.history.iloc[-1]
        drift = abs(last["total_energy"] - first["total_energy"]) / first["total_energy"]
        return {
            "status": "completed",
            "cycles": int(last["cycle"]),
            "particles": sum(len(p) for p in result.particles),
            "energy_drift": float(drift),
            "kernel_summary": result.kernel_summary().to_dict(orient="records"),
            "paths": paths,
            "result": result,
        }


def get_pic_service(output_dir: Optional[Union[str, Path]] = None) -> PicService:
    """Dependency injection for PIC service"""
    return PicService(output_dir)
