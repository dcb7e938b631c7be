"""
Experiment orchestration: replicas, reduction, reference values and checks.
"""

import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import CheckSpec, CheckType, ExperimentConfig, ObservableProbe
from .core.engine import EventTrace, ReplicaResult, run_replica
from .core.limits import LimitField, netcol_variance_target, reference_value
from .core.stats import (
    CheckRecord,
    SummaryStats,
    compare_bound,
    compare_to_reference,
    compare_variance,
    gaussian_record,
    reject_reference,
    summarize,
)
from .errors import SepfluxError, StatisticsError, UsageError
from .report import Report, ReportRow, canonical_json, content_hash, write_reports

logger = logging.getLogger(__name__)


def input_hash(cfg: ExperimentConfig) -> str:
    """Content hash of the normalised inputs; scheduling and output paths excluded."""
    inputs = cfg.to_dict()
    for key in ("output_dir", "threads"):
        inputs.pop(key, None)
    return content_hash(canonical_json(inputs))


def _trace_path(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output_dir) / f"{cfg.experiment_id}.L{cfg.L}.trace.bin"


def _run_replicas(
    cfg: ExperimentConfig, trace: Optional[EventTrace]
) -> Tuple[Dict[int, ReplicaResult], Dict[int, dict]]:
    results: Dict[int, ReplicaResult] = {}
    failures: Dict[int, dict] = {}

    def one(replica_id: int) -> ReplicaResult:
        return run_replica(cfg, replica_id, trace if replica_id == 0 else None)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = {rid: pool.submit(one, rid) for rid in range(cfg.replicas)}
        for rid, future in futures.items():
            try:
                results[rid] = future.result()
                logger.info("replica %d done: %d events", rid, results[rid].events)
            except SepfluxError as exc:
                logger.error("replica %d failed: %s", rid, exc)
                failures[rid] = exc.to_dict()
    return results, failures


def _natural_reference(field: LimitField, cfg: ExperimentConfig, probe: ObservableProbe, t: float) -> float:
    return reference_value(field, probe.kind.value, cfg.test_functions[probe.phi_id], t)


def evaluate_check(
    check: CheckSpec,
    summary: SummaryStats,
    field: LimitField,
    cfg: ExperimentConfig,
    t: float,
) -> CheckRecord:
    """Verdict of one check on the replica summary of its observable at time t."""
    phi = cfg.test_functions[check.probe.phi_id]
    try:
        if check.type == CheckType.MEAN:
            ref = _natural_reference(field, cfg, check.probe, t)
            return compare_to_reference(summary, ref, atol=check.atol, z=check.z, rtol=check.rtol)
        if check.type == CheckType.BOUND:
            bound = check.value if check.value is not None else cfg.d * cfg.rho0.sup_bound**2
            return compare_bound(summary, bound, z=check.z)
        if check.type == CheckType.VARIANCE:
            target = check.value if check.value is not None else netcol_variance_target(field, phi, t)
            return compare_variance(summary, target, rel=check.rel)
        if check.type == CheckType.GAUSSIAN:
            return gaussian_record(summary)
        if check.type == CheckType.REJECT:
            return reject_reference(summary, _rejected_value(check, field, cfg, t), check.z, check.statistic)
    except StatisticsError as exc:
        return CheckRecord(
            check=check.type.value,
            statistic=check.statistic,
            value=summary.mean,
            reference=None,
            tolerance=0.0,
            passed=False,
            operands=exc.to_dict(),
        )
    raise UsageError(f"{check.type.value} checks are evaluated on martingales")


def _rejected_value(check: CheckSpec, field: LimitField, cfg: ExperimentConfig, t: float) -> float:
    if check.value is not None:
        return check.value
    phi = cfg.test_functions[check.probe.phi_id]
    if check.alpha is not None:
        alternative = LimitField(cfg.rho0, alpha=check.alpha)
        base = reference_value(alternative, check.probe.kind.value, phi, t)
    elif check.statistic == "var":
        base = netcol_variance_target(field, phi, t)
    else:
        base = _natural_reference(field, cfg, check.probe, t)
    return base * (check.factor if check.factor is not None else 1.0)


def _martingale_records(check: CheckSpec, m: SummaryStats, qv: SummaryStats) -> List[CheckRecord]:
    mean = dataclasses.replace(
        compare_to_reference(m, 0.0, atol=check.atol, z=check.z), check="martingale_mean"
    )
    spread = dataclasses.replace(compare_variance(m, qv.mean, rel=check.rel), check="martingale_qv")
    return [mean, spread]


def run_experiment(cfg: ExperimentConfig) -> Report:
    """
    Run every replica of a single-size experiment and evaluate its checks.

    Replica errors are collected per id; the report then carries no rows and
    fails.
    """
    if cfg.is_sweep:
        raise UsageError("run_experiment takes a single lattice size; use run_sweep")
    started = time.perf_counter()
    exploratory = cfg.exploratory
    logger.info(
        "experiment %s: d=%d L=%d n=%d R=%d T=%g",
        cfg.experiment_id, cfg.d, cfg.L, cfg.n, cfg.replicas, cfg.T,
    )
    if exploratory:
        logger.warning("exploratory mode: checks are reported as info")

    trace = EventTrace() if cfg.debug_trace else None
    results, failures = _run_replicas(cfg, trace)
    report = Report(
        experiment_id=cfg.experiment_id,
        L=cfg.L,
        n=cfg.n,
        regime=cfg.regime.to_dict(),
        config=cfg.to_dict(),
        input_hash=input_hash(cfg),
        failures=failures,
        exploratory=exploratory,
    )
    if trace is not None and 0 in results:
        path = _trace_path(cfg)
        path.parent.mkdir(parents=True, exist_ok=True)
        trace.write(path)
        logger.info("event trace of replica 0 (%d events) written to %s", trace.length, path)
    if failures:
        return report

    order = sorted(results)
    field = LimitField(cfg.rho0, alpha=cfg.regime.limit_alpha)

    for probe in cfg.observables:
        for t in cfg.sample_times:
            summary = summarize([results[r].samples[t][probe.label] for r in order])
            reference = _natural_reference(field, cfg, probe, t)
            checks = [
                c
                for c in cfg.checks
                if c.probe == probe and c.type != CheckType.MARTINGALE and t in c.times
            ]
            if not checks:
                report.rows.append(ReportRow(probe.kind.value, probe.phi_id, t, summary, reference))
            for check in checks:
                record = evaluate_check(check, summary, field, cfg, t)
                record.exploratory = exploratory
                report.rows.append(
                    ReportRow(probe.kind.value, probe.phi_id, t, summary, reference, record)
                )

    for probe in cfg.martingales:
        for t in cfg.sample_times:
            m = summarize([results[r].martingales[t][probe.label][0] for r in order])
            qv = summarize([results[r].martingales[t][probe.label][1] for r in order])
            name = f"martingale.{probe.kind.value}"
            report.rows.append(ReportRow(f"qv.{probe.kind.value}", probe.phi_id, t, qv))
            checks = [
                c
                for c in cfg.checks
                if c.probe == probe and c.type == CheckType.MARTINGALE and t in c.times
            ]
            if not checks:
                report.rows.append(ReportRow(name, probe.phi_id, t, m, 0.0))
            for check in checks:
                for record in _martingale_records(check, m, qv):
                    record.exploratory = exploratory
                    report.rows.append(ReportRow(name, probe.phi_id, t, m, 0.0, record))

    report.audits = sum(results[r].audits for r in order)
    events = sum(results[r].events for r in order)
    elapsed = time.perf_counter() - started
    report.metrics = {
        "runtime_s": elapsed,
        "events": events,
        "attempts": sum(results[r].attempts_total for r in order),
        "events_per_s": events / elapsed if elapsed > 0 else None,
        "mean_particles": sum(results[r].n_particles for r in order) / len(order),
    }
    for record in report.records:
        logger.info("check %s/%s: %s", record.check, record.statistic, record.status.value)
    logger.info(
        "experiment %s L=%d finished: %s (%d events, %.2fs)",
        cfg.experiment_id, cfg.L, report.status, events, elapsed,
    )
    return report


def run_sweep(cfg: ExperimentConfig) -> List[Report]:
    """One report per lattice size of the config."""
    return [run_experiment(cfg.for_size(L)) for L, _ in cfg.sizes]


def run_and_write(cfg: ExperimentConfig) -> Tuple[List[Report], Dict[str, Path]]:
    reports = run_sweep(cfg)
    paths = write_reports(reports, cfg.output_dir, cfg.experiment_id, cfg.to_dict())
    return reports, paths
