"""End-to-end stages: simulate a dataset, train one model, run the benchmark."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, dump_config
from .errors import DataError
from .eucsim import (
    LoadProfile,
    TimeSeriesDataset,
    generate_profile,
    load_profile,
    sample_population,
    sample_prices,
    simulate,
    write_dataset,
)
from .features import (
    apply_scaler,
    build_direct_dataset,
    build_sequence_dataset,
    fit_scaler,
    split,
)
from .metrics import (
    EvalReport,
    evaluate,
    model_name,
    table_from_reports,
    write_report_document,
    write_violin_csv,
)
from .models import linear_fit, save_model, train_fnn, train_recurrent
from .ioutil import atomic_write_text


def simulate_from_config(config: RunConfig) -> TimeSeriesDataset:
    """Population, profile, and prices from the configured seeds, then simulate."""
    sim = config.simulation
    population = sample_population(
        sim.euc_count,
        sim.population_seed,
        peak_range=(sim.peak_low, sim.peak_high),
        rho_scale=sim.rho_scale,
        min_fraction=sim.min_fraction,
    )
    if sim.profile_path is not None:
        profile = load_profile(sim.profile_path)
        if len(profile.values) < sim.horizon:
            raise DataError(
                f"profile {sim.profile_path} has {len(profile.values)} intervals,"
                f" horizon needs {sim.horizon}"
            )
        if len(profile.values) > sim.horizon:
            profile = LoadProfile(values=profile.values[: sim.horizon], source=profile.source)
    else:
        profile = generate_profile(sim.horizon, sim.intervals_per_day, sim.profile_seed)
    prices = sample_prices(sim.horizon, sim.price_low, sim.price_high, sim.price_seed)
    return simulate(
        population,
        prices,
        profile,
        noise_std=sim.noise_std,
        rng_seed=sim.noise_seed,
        intervals_per_day=sim.intervals_per_day,
        resample_alpha_hourly=sim.resample_alpha_hourly,
    )


@dataclass(frozen=True)
class TrainedModel:
    """One benchmark entry: the fitted model plus its split reports."""

    kind: str
    order: int
    model: object
    final_loss: float | None  # None for the closed-form linear fit
    train_report: EvalReport
    test_report: EvalReport

    @property
    def name(self) -> str:
        return model_name(self.kind, self.order)


def train_model(config: RunConfig, dataset: TimeSeriesDataset, kind: str, order: int) -> TrainedModel:
    """Fit one model on the train split and evaluate it on both splits."""
    train_ts, test_ts = split(dataset, config.benchmark.train_len)
    train_cfg = config.train_config()
    losses = None
    if kind in ("linear", "fnn"):
        state_cfg = config.state_config(order)
        raw = build_direct_dataset(train_ts, state_cfg)
        scaler = fit_scaler(raw)
        scaled = apply_scaler(scaler, raw)
        if kind == "linear":
            model = linear_fit(scaled, scaler=scaler, state_config=state_cfg)
        else:
            model, losses = train_fnn(
                scaled, list(config.training.fnn_hidden), train_cfg, scaler, state_cfg
            )
    elif kind in ("rnn", "lstm"):
        order = 1  # recurrent steps always carry exactly the latest observation
        state_cfg = config.state_config(order)
        raw = build_sequence_dataset(train_ts, config.training.window_length, state_cfg)
        scaler = fit_scaler(raw)
        scaled = apply_scaler(scaler, raw)
        hidden = config.training.rnn_hidden if kind == "rnn" else config.training.lstm_hidden
        model, losses = train_recurrent(scaled, kind, list(hidden), train_cfg, scaler, state_cfg)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return TrainedModel(
        kind=kind,
        order=order,
        model=model,
        final_loss=None if losses is None else float(losses[-1]),
        train_report=evaluate(model, train_ts, "train"),
        test_report=evaluate(model, test_ts, "test"),
    )


def benchmark_jobs(config: RunConfig) -> list[tuple[str, int]]:
    """(kind, order) pairs: every order for direct families, one per recurrent."""
    jobs: list[tuple[str, int]] = []
    for kind in ("linear", "fnn"):
        if kind in config.benchmark.kinds:
            jobs.extend((kind, order) for order in config.benchmark.orders)
    for kind in ("rnn", "lstm"):
        if kind in config.benchmark.kinds:
            jobs.append((kind, 1))
    return jobs


def _file_name(kind: str, order: int) -> str:
    if kind in ("rnn", "lstm"):
        return kind
    return f"{kind}_n{order}"


def _run_job(args: tuple[RunConfig, TimeSeriesDataset, str, int]) -> TrainedModel:
    config, dataset, kind, order = args
    return train_model(config, dataset, kind, order)


@dataclass(frozen=True)
class BenchmarkResult:
    trained: list[TrainedModel]
    tables: dict[str, str]  # family tag -> rendered text table
    report_path: str
    violin_path: str


def run_benchmark(config: RunConfig, out_dir: str, workers: int = 1) -> BenchmarkResult:
    """Train every configured model, then emit reports, tables, and violin data.

    Any failure removes the files already written to out_dir and re-raises
    with the failing stage named.
    """
    os.makedirs(out_dir, exist_ok=True)
    models_dir = os.path.join(out_dir, "models")
    os.makedirs(models_dir, exist_ok=True)
    written: list[str] = []
    stage = "simulate"
    try:
        dataset = simulate_from_config(config)
        path = os.path.join(out_dir, "dataset.csv")
        write_dataset(dataset, path)
        written.append(path)
        path = os.path.join(out_dir, "config.yaml")
        atomic_write_text(path, dump_config(config))
        written.append(path)

        jobs = benchmark_jobs(config)
        trained: list[TrainedModel] = []
        if workers > 1:
            stage = "train (worker pool)"
            with ProcessPoolExecutor(max_workers=workers) as pool:
                args = [(config, dataset, kind, order) for kind, order in jobs]
                trained = list(pool.map(_run_job, args))
        else:
            for kind, order in jobs:
                stage = f"train {_file_name(kind, order)}"
                trained.append(train_model(config, dataset, kind, order))
        for entry in trained:
            stage = f"save {entry.name}"
            path = os.path.join(models_dir, _file_name(entry.kind, entry.order) + ".json")
            save_model(entry.model, path)
            written.append(path)

        stage = "report"
        reports: list[EvalReport] = []
        for entry in trained:
            reports.extend([entry.train_report, entry.test_report])
        report_path = os.path.join(out_dir, "report.json")
        write_report_document(reports, report_path)
        written.append(report_path)

        tables: dict[str, str] = {}
        orders = config.benchmark.orders
        for kind, title in (
            ("linear", "Dynamic demand-response model, linear family"),
            ("fnn", "Dynamic demand-response model, feedforward family"),
        ):
            if kind in config.benchmark.kinds:
                columns = [(str(n), model_name(kind, n)) for n in orders]
                tables[kind] = table_from_reports(title, "order n", columns, reports)
        recurrent = [k for k in ("rnn", "lstm") if k in config.benchmark.kinds]
        if recurrent:
            columns = [(k.upper(), k) for k in recurrent]
            tables["recurrent"] = table_from_reports(
                "Dynamic demand-response model, recurrent families", "", columns, reports
            )
        for tag, text in tables.items():
            path = os.path.join(out_dir, f"table_{tag}.txt")
            atomic_write_text(path, text)
            written.append(path)

        stage = "violin data"
        by_name = {entry.name: entry for entry in trained}
        violin_names = []
        if orders:
            top = max(orders)
            violin_names.extend(
                model_name(k, top) for k in ("linear", "fnn") if k in config.benchmark.kinds
            )
        violin_names.extend(k for k in recurrent)
        violin_reports = [by_name[n].test_report for n in violin_names if n in by_name]
        violin_path = os.path.join(out_dir, "violin.csv")
        write_violin_csv(violin_reports, violin_path)
        written.append(violin_path)
    except BaseException as exc:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        exc.args = (f"benchmark stage '{stage}' failed: {exc}",) + exc.args[1:]
        raise
    return BenchmarkResult(
        trained=trained,
        tables=tables,
        report_path=report_path,
        violin_path=violin_path,
    )
