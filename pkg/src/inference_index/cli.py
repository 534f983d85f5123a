"""Command-line entry point for every harness workflow.

Commands:
    record   -- run a scripted or interactive session against an endpoint
    metrics  -- score a prediction file against a truth file
    eval     -- session log + predictions -> full index report
    train    -- train the reference forecaster, emit model + predictions
    report   -- aggregate eval outputs into tables, ranking and plot series
    serve    -- run the local evaluation service

Commands are reproducible from their inputs alone; failures exit nonzero with
a machine-readable JSON error on stderr.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click

from . import __version__
from .config import ConfigError, HarnessConfig, load_config
from .forecaster import (
    DatasetError,
    ForecastConfig,
    TrainingDiverged,
    load_weather_csv,
    make_sine_dataset,
    save_model,
    split_train_test,
    train_and_predict,
    write_dataset_csv,
)
from .indices import evaluate
from .llm_client import EndpointError, ScriptedSessionError, run_scripted_session, send_query
from .metrics import MetricReport, metric_report
from .report import (
    FrameworkResult,
    PlotWindow,
    comparison_table,
    emit_plot_series,
    jsonable,
    mape_average,
    ranking_table,
    render_index,
    render_metric,
)
from .session import (
    OUTCOME_TAGS,
    SessionFormatError,
    SessionStateError,
    append,
    derive_stats,
    load as load_session,
    open_session,
    save as save_session,
)

_DOMAIN_ERRORS = (
    ConfigError,
    DatasetError,
    EndpointError,
    ScriptedSessionError,
    SessionFormatError,
    SessionStateError,
    TrainingDiverged,
    ValueError,
    OSError,
)


def _fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _DOMAIN_ERRORS as exc:
            code = type(exc).__name__
            sys.stderr.write(json.dumps({"code": code, "message": str(exc)}) + "\n")
            raise SystemExit(1) from None

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="ini-eval")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Harness configuration file (JSON).")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Evaluation harness: record sessions, score predictions, compose indices."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


def _config(ctx: click.Context) -> HarnessConfig:
    return load_config(ctx.obj.get("config_path"))


def _read_series_csv(path: Path) -> dict[str, list[float]]:
    """Header + numeric columns; a leading 'index' column and '_pred' suffixes
    are ignored so forecaster output files can be fed back in directly."""
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        keep = [i for i, name in enumerate(names) if name.lower() != "index"]
        columns: dict[str, list[float]] = {
            names[i].removesuffix("_pred"): [] for i in keep
        }
        keys = list(columns)
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            for key, i in zip(keys, keep):
                try:
                    columns[key].append(float(row[i]))
                except (ValueError, IndexError):
                    raise ValueError(
                        f"{path}: bad numeric cell at row {row_num}, column {names[i]!r}"
                    ) from None
    if not any(columns.values()):
        raise ValueError(f"{path}: no data rows")
    return columns


def _paired_reports(
    pred_path: Path, truth_path: Path, mask_eps: float
) -> dict[str, MetricReport]:
    preds = _read_series_csv(pred_path)
    truths = _read_series_csv(truth_path)
    pred_keys, truth_keys = list(preds), list(truths)
    if len(pred_keys) != len(truth_keys):
        raise ValueError(
            f"variable count mismatch: {pred_path} has {pred_keys}, {truth_path} has {truth_keys}"
        )
    reports = {}
    for pred_key, truth_key in zip(pred_keys, truth_keys):
        reports[truth_key] = metric_report(preds[pred_key], truths[truth_key], mask_eps)
    return reports


def _print_metric_table(reports: dict[str, MetricReport]) -> None:
    fields = ("mse", "mae", "mb", "mape_pct", "mape_masked_pct", "mfe_pct", "mfb_pct",
              "r2", "pearson_r")
    width = max(len(f) for f in fields) + 2
    header = "".join(f"{var:>16}" for var in reports)
    click.echo(" " * width + header)
    for field_name in fields:
        cells = "".join(
            f"{render_metric(getattr(rep, field_name)):>16}" for rep in reports.values()
        )
        click.echo(f"{field_name:<{width}}" + cells)


@main.command()
@click.option("--endpoint", "endpoint_name", required=True, help="Endpoint name from the config registry.")
@click.option("--script", "script_path", type=click.Path(exists=True), default=None,
              help="JSON array of prompts; each prompt is one attempt.")
@click.option("--interactive", is_flag=True, help="Type prompts and tags at the terminal.")
@click.option("--task", default="task", help="Task label stored in the log.")
@click.option("--final-tag", default="accepted", type=click.Choice(OUTCOME_TAGS))
@click.option("--out", "out_path", type=click.Path(), required=True, help="Session log output path.")
@click.pass_context
@_fail_cleanly
def record(ctx, endpoint_name, script_path, interactive, task, final_tag, out_path):
    """Record one evaluation session, scripted or interactive."""
    config = _config(ctx)
    endpoint = config.endpoint(endpoint_name)
    if bool(script_path) == bool(interactive):
        raise click.UsageError("exactly one of --script or --interactive is required")
    if script_path:
        script = json.loads(Path(script_path).read_text(encoding="utf-8"))
        if not isinstance(script, list) or not all(isinstance(p, str) for p in script):
            raise ValueError(f"{script_path}: expected a JSON array of prompt strings")
        log = run_scripted_session(
            endpoint, script, framework_label=endpoint_name, task_label=task,
            final_tag=final_tag,
        )
    else:
        log = _interactive_session(endpoint, endpoint_name, task)
    save_session(log, out_path)
    click.echo(f"session {log.session_id} written to {out_path}")


def _interactive_session(endpoint, framework_label, task_label):
    log = open_session(framework_label, task_label)
    conversation = []
    click.echo("interactive session; empty prompt closes the session")
    while True:
        prompt = click.prompt("prompt", default="", show_default=False)
        if not prompt:
            append(log, "session_closed", {"status": "ended_by_user"})
            return log
        append(log, "attempt_started")
        conversation.append(("user", prompt))
        while True:
            append(log, "query_sent", {"prompt": prompt})
            result = send_query(endpoint, conversation)
            if result.status == "answer":
                append(log, "response_received",
                       {"latency_s": result.latency_s, "text": result.text})
                click.echo(f"[{result.latency_s:.1f} s]\n{result.text}")
                break
            if result.status == "server_busy":
                append(log, "sb_detected", {"wait_s": result.latency_s,
                                            "detail": result.detail or ""})
                click.echo(f"server busy ({result.detail}); press enter to retry")
                click.prompt("", default="", show_default=False)
                continue
            raise ScriptedSessionError(f"transport failure: {result.detail}", log)
        conversation.append(("assistant", result.text or ""))
        tag = click.prompt("tag", type=click.Choice(OUTCOME_TAGS))
        append(log, "outcome_tagged", {"tag": tag})
        if tag == "accepted":
            append(log, "session_closed", {"status": "completed"})
            return log


@main.command("metrics")
@click.option("--pred", "pred_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True), required=True)
@click.option("--mask-eps", type=float, default=None,
              help="Near-zero exclusion threshold for masked MAPE (default from config).")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Also write JSON here.")
@click.pass_context
@_fail_cleanly
def metrics_cmd(ctx, pred_path, truth_path, mask_eps, out_path):
    """Compute the error-metric suite for a prediction file vs a truth file."""
    config = _config(ctx)
    eps = config.index.mask_eps if mask_eps is None else mask_eps
    reports = _paired_reports(Path(pred_path), Path(truth_path), eps)
    _print_metric_table(reports)
    payload = jsonable({var: rep.to_dict() for var, rep in reports.items()})
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
        click.echo(f"metrics written to {out_path}")
    else:
        click.echo(json.dumps(payload))


@main.command("eval")
@click.option("--session", "session_path", type=click.Path(exists=True), required=True)
@click.option("--pred", "pred_path", type=click.Path(exists=True), required=True)
@click.option("--truth", "truth_path", type=click.Path(exists=True), required=True)
@click.option("--mask-eps", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.pass_context
@_fail_cleanly
def eval_cmd(ctx, session_path, pred_path, truth_path, mask_eps, out_path):
    """Compose the full index report for one recorded session."""
    config = _config(ctx)
    eps = config.index.mask_eps if mask_eps is None else mask_eps
    log = load_session(session_path)
    stats = derive_stats(log)
    reports = _paired_reports(Path(pred_path), Path(truth_path), eps)
    mape_av = mape_average(reports)
    ini_report = evaluate(stats, mape_av, config.index)

    click.echo(f"framework   {log.framework_label}")
    click.echo(f"attempts Q  {stats.attempts_q}")
    click.echo(f"queries N   {stats.total_queries_n}")
    click.echo(f"SB          {stats.sb_count}")
    click.echo(f"ARTpQ (s)   {ini_report.artpq_s:.2f}")
    click.echo(f"MAPE_av (%) {render_metric(mape_av)}")
    for name, value in (("E_SBR", ini_report.e_sbr), ("E_ART", ini_report.e_art),
                        ("E", ini_report.e), ("C", ini_report.c), ("A", ini_report.a)):
        click.echo(f"{name:<11} {render_index(value)}")
    click.echo(f"InI         {render_index(ini_report.ini)}")

    payload = jsonable(
        {
            "framework_label": log.framework_label,
            "session_id": log.session_id,
            "metric_reports": {var: rep.to_dict() for var, rep in reports.items()},
            "ini_report": ini_report.to_dict(),
        }
    )
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
        click.echo(f"eval report written to {out_path}")


@main.command("train")
@click.argument("data_csv", type=click.Path(exists=True), required=False)
@click.option("--synthetic-sine", is_flag=True,
              help="Train on the bundled noiseless sinusoid instead of a CSV.")
@click.option("--target", "targets", multiple=True,
              help="Target column (repeatable); default temp, hum, windvel.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--mask-eps", type=float, default=None)
@click.option("--out-dir", type=click.Path(), default="train-out")
@click.pass_context
@_fail_cleanly
def train_cmd(ctx, data_csv, synthetic_sine, targets, seed, mask_eps, out_dir):
    """Train the reference forecaster and score it on the held-out tail."""
    config = _config(ctx)
    cfg = config.forecast
    if seed is not None:
        cfg = ForecastConfig.from_dict({**cfg.to_dict(), "seed": seed})
    eps = config.index.mask_eps if mask_eps is None else mask_eps

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if bool(data_csv) == bool(synthetic_sine):
        raise click.UsageError("provide either DATA_CSV or --synthetic-sine")
    if synthetic_sine:
        ds = make_sine_dataset()
        write_dataset_csv(ds, out / "sine.csv")
    else:
        names = tuple(targets) if targets else ("temp", "hum", "windvel")
        aliases = {t: (t,) for t in targets} if targets else None
        ds = load_weather_csv(data_csv, target_names=names, aliases=aliases)

    model, preds, truths = train_and_predict(ds, cfg)
    for i, loss in enumerate(model.epoch_losses, start=1):
        click.echo(f"epoch {i:>3}  loss {loss:.6f}")

    model_path = save_model(model, out / "model.npz")
    pred_path = out / "predictions.csv"
    truth_path = out / "truth.csv"
    names = model.target_names
    with pred_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index"] + [f"{n}_pred" for n in names])
        for i in range(len(preds[names[0]])):
            writer.writerow([i] + [repr(float(preds[n][i])) for n in names])
    with truth_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index"] + list(names))
        for i in range(len(truths[names[0]])):
            writer.writerow([i] + [repr(float(truths[n][i])) for n in names])

    reports = {n: metric_report(preds[n], truths[n], eps) for n in names}
    _print_metric_table(reports)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(
        json.dumps(jsonable({n: r.to_dict() for n, r in reports.items()}), indent=2),
        encoding="utf-8",
    )
    click.echo(f"model: {model_path}")
    click.echo(f"predictions: {pred_path}")
    click.echo(f"truth: {truth_path}")
    click.echo(f"metrics: {metrics_path}")


def _parse_window(text: str) -> PlotWindow:
    try:
        start, end = text.split(":")
        return PlotWindow(int(start), int(end))
    except ValueError:
        raise ValueError(f"window must be 'start:end', got {text!r}") from None


@main.command("report")
@click.argument("eval_jsons", type=click.Path(exists=True), nargs=-1, required=True)
@click.option("--out-dir", type=click.Path(), default="report-out")
@click.option("--truth", "truth_path", type=click.Path(exists=True), default=None,
              help="Truth CSV for plot series.")
@click.option("--pred", "pred_specs", multiple=True, metavar="NAME=FILE",
              help="Prediction CSV per framework for plot series (repeatable).")
@click.option("--window", "window_specs", multiple=True, metavar="START:END",
              help="Focus window for plots (repeatable).")
@_fail_cleanly
def report_cmd(eval_jsons, out_dir, truth_path, pred_specs, window_specs):
    """Aggregate eval outputs into comparison tables, a ranking and plot series."""
    results = []
    for path in eval_jsons:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        reports = {
            var: MetricReport.from_dict(_unjson(rep))
            for var, rep in data["metric_reports"].items()
        }
        from .indices import InIReport

        results.append(
            FrameworkResult(
                framework_label=data["framework_label"],
                metric_reports=reports,
                ini_report=InIReport.from_dict(data["ini_report"]),
                session_ref=data.get("session_id", ""),
            )
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    ranking = ranking_table(results)
    (out / "ranking.json").write_text(json.dumps(jsonable(ranking), indent=2), encoding="utf-8")
    tables = {
        metric: jsonable(comparison_table(results, metric))
        for metric in ("mape_masked_pct", "mape_pct", "mse", "mae", "r2", "pearson_r")
    }
    (out / "tables.json").write_text(json.dumps(tables, indent=2), encoding="utf-8")

    click.echo(f"{'framework':<12} {'InI':>6}")
    for row in ranking:
        click.echo(f"{row['framework']:<12} {render_index(row['ini']):>6}")

    if truth_path and pred_specs:
        truths = _read_series_csv(Path(truth_path))
        windows = [_parse_window(w) for w in window_specs]
        named_preds = {}
        for spec in pred_specs:
            name, _, file_part = spec.partition("=")
            if not file_part:
                raise ValueError(f"--pred expects NAME=FILE, got {spec!r}")
            named_preds[name] = _read_series_csv(Path(file_part))
        for var, truth_series in truths.items():
            per_framework = {
                name: series[var] for name, series in named_preds.items() if var in series
            }
            if per_framework:
                emit_plot_series(truth_series, per_framework, windows, out, variable=var)
        click.echo(f"plot series written to {out}")
    click.echo(f"ranking: {out / 'ranking.json'}")
    click.echo(f"tables: {out / 'tables.json'}")


def _unjson(report_dict: dict) -> dict:
    out = {}
    for key, value in report_dict.items():
        if value == "inf":
            out[key] = float("inf")
        elif value == "-inf":
            out[key] = float("-inf")
        else:
            out[key] = value
    return out


@main.command("serve")
@click.option("--port", type=int, default=None, help="Override the configured port.")
@click.pass_context
@_fail_cleanly
def serve_cmd(ctx, port):
    """Run the local evaluation service until interrupted."""
    config = _config(ctx)
    if port is not None:
        config.service.port = port
    from .service import run_service

    run_service(config)


if __name__ == "__main__":
    main()
