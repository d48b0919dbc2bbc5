#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: client.py

import datetime
import json
import logging
import os
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction

from ham_bsde import __version__
from ham_bsde.codec import (
    observables_to_dict,
    report_to_dict,
    solution_to_dict,
    write_cpu_models_csv,
    write_json,
    write_report_csv,
    write_sweep_csv,
    write_sweep_long,
    write_timing_csv,
)
from ham_bsde.diagnostics import (
    EXACT_ERROR,
    OPERATOR_RESIDUAL,
    QUADRATURES,
    NormSpec,
    argmin_c0,
    convergence_window,
    cpu_time_models,
    observable_errors,
    reproduce_table,
    sweep_c0,
)
from ham_bsde.engine import partial_sums, run_series
from ham_bsde.exceptions import ConfigError, UnsupportedError
from ham_bsde.problems import HighDimFbsde, exact_initial_values, extract_observables, get_problem
from ham_bsde.utils import (
    MIN_PRECISION_BITS,
    Run_ConfigParser,
    check_output_dir,
    format_sci,
    parse_domain,
    parse_grid,
    parse_orders,
    parse_rational,
)

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
CPU_MODEL_DIMS = range(3, 13)

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off", "")


def _to_bool(key, value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ConfigError("[-] Error: %s must be a boolean, got %r." % (key, value))


def _to_int(key, value, minimum=None):
    try:
        number = int(str(value).strip())
    except ValueError:
        raise ConfigError("[-] Error: %s must be an integer, got %r." % (key, value))
    if minimum is not None and number < minimum:
        raise ConfigError("[-] Error: %s must be >= %d, got %d." % (key, minimum, number))
    return number


def _to_formats(value):
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    formats = tuple(sorted(set(s.strip().lower() for s in items if s.strip())))
    if not formats or any(f not in FORMATS for f in formats):
        raise ConfigError("[-] Error: format must be a subset of %s, got %r." % (",".join(FORMATS), value))
    return formats


@dataclass(frozen=True)
class RunConfig(object):
    """Validated run parameters; build it with ``RunConfig.from_mapping``."""

    problem: str
    d: object = None
    order: int = 0
    orders: tuple = ()
    c0: Fraction = Fraction(-1)
    c0_grid: tuple = ()
    precision_bits: int = 256
    domain: dict = field(default_factory=dict)
    quadrature: object = None
    nodes: object = None
    samples: object = None
    seed: int = 42
    out: str = "runs"
    format: tuple = FORMATS
    workers: int = 1
    term_cap: object = None
    residual: bool = False
    debug: bool = False

    KEYS = (
        "problem",
        "d",
        "order",
        "orders",
        "c0",
        "c0_grid",
        "precision_bits",
        "domain",
        "quadrature",
        "nodes",
        "samples",
        "seed",
        "out",
        "format",
        "workers",
        "term_cap",
        "residual",
        "debug",
    )

    @classmethod
    def from_mapping(cls, mapping):
        """
        Validate a raw mapping (config file values, command line flags).
        arguments:
        @mapping: dict, keys as in KEYS ("-" and "_" are interchangeable)
        @return RunConfig
        """
        raw = dict((str(k).replace("-", "_"), v) for k, v in mapping.items() if v is not None)
        unknown = sorted(set(raw) - set(cls.KEYS))
        if unknown:
            raise ConfigError("[-] Error: unknown config keys: %s." % ", ".join(unknown))
        if not raw.get("problem"):
            raise ConfigError("[-] Error: you have to set `problem`.")
        values = {"problem": str(raw["problem"]).strip()}
        if "d" in raw:
            values["d"] = _to_int("d", raw["d"], 1)
        if "order" in raw:
            values["order"] = _to_int("order", raw["order"], 0)
        if "orders" in raw:
            values["orders"] = tuple(parse_orders(raw["orders"]))
        if "c0" in raw:
            values["c0"] = parse_rational(raw["c0"])
        if "c0_grid" in raw:
            values["c0_grid"] = tuple(parse_grid(raw["c0_grid"]))
        if "precision_bits" in raw:
            values["precision_bits"] = _to_int("precision_bits", raw["precision_bits"], MIN_PRECISION_BITS)
        if "domain" in raw:
            values["domain"] = parse_domain(raw["domain"])
        if "quadrature" in raw:
            quadrature = str(raw["quadrature"]).strip().lower()
            if quadrature not in QUADRATURES:
                raise ConfigError("[-] Error: quadrature must be one of %s." % ", ".join(QUADRATURES))
            values["quadrature"] = quadrature
        for key, minimum in (("nodes", 1), ("samples", 1), ("seed", 0), ("workers", 1), ("term_cap", 1)):
            if key in raw:
                values[key] = _to_int(key, raw[key], minimum)
        if "out" in raw:
            values["out"] = str(raw["out"])
        if "format" in raw:
            values["format"] = _to_formats(raw["format"])
        for key in ("residual", "debug"):
            if key in raw:
                values[key] = _to_bool(key, raw[key])
        config = cls(**values)
        # resolves the problem id now so a bad id or d fails before any computation
        config.problem_spec()
        return config

    def problem_spec(self):
        return get_problem(self.problem, self.d)

    def norm_spec(self, problem, kind=EXACT_ERROR):
        spec = NormSpec.default(
            problem,
            kind,
            quadrature=self.quadrature,
            nodes=self.nodes,
            samples=self.samples,
            seed=self.seed,
            precision_bits=self.precision_bits,
        )
        return spec.with_domain(self.domain)

    def as_dict(self):
        out = OrderedDict()
        for key in self.KEYS:
            value = getattr(self, key)
            if isinstance(value, Fraction):
                value = str(value)
            elif key == "c0_grid":
                value = [str(c) for c in value]
            elif key == "domain":
                value = OrderedDict((k, "%s:%s" % v) for k, v in sorted(value.items()))
            elif isinstance(value, tuple):
                value = list(value)
            out[key] = value
        return out


def get_run_conf(conf_path):
    """
    Read a run config file.
    ``.json`` files are parsed as JSON, anything else as sectionless ``key = value`` lines.
    @return dict
    """
    if not os.path.isfile(conf_path):
        raise ConfigError("[-] Error: config file %s does not exist." % conf_path)
    if conf_path.endswith(".json"):
        try:
            with open(conf_path) as f:
                conf = json.load(f)
        except ValueError as e:
            raise ConfigError("[-] Error: %s is not valid JSON: %s" % (conf_path, e))
        if not isinstance(conf, dict):
            raise ConfigError("[-] Error: %s must hold a JSON object." % conf_path)
        return conf
    cf = Run_ConfigParser()
    cf.read(conf_path)
    return cf.as_dict()


def _slug(text):
    return re.sub(r"[^A-Za-z0-9.\-]+", "_", str(text)).strip("_")


class Ham_client(object):
    """
    Runs solve/table/sweep for one RunConfig and persists the results.

    Every run writes into ``<out>/<problem>_<order>_<c0>``: result files, a
    manifest.json (config echo, files, term counts) and a metadata.json holding
    everything that varies between identical runs (timestamps, wall times).
    """

    def __init__(self, config, debug=False):
        self.config = config
        self.problem = config.problem_spec()
        self.debug = debug or config.debug
        if self.debug:
            logging.getLogger("ham_bsde").setLevel(logging.DEBUG)

    def run_dir(self, order, c0_label):
        path = os.path.join(
            self.config.out, "%s_%s_%s" % (_slug(self.problem.name), order, _slug(c0_label))
        )
        ok, errmsg = check_output_dir(self.config.out)
        if not ok:
            raise ConfigError(errmsg)
        ok, errmsg = check_output_dir(path)
        if not ok:
            raise ConfigError(errmsg)
        if not os.path.isdir(path):
            os.makedirs(path)
        return path

    def _finish(self, path, command, files, terms, wall_times):
        manifest = OrderedDict(
            [
                ("command", command),
                ("problem", self.problem.name),
                ("config", self.config.as_dict()),
                ("files", sorted(files)),
                ("terms", terms),
            ]
        )
        write_json(os.path.join(path, "manifest.json"), manifest)
        metadata = OrderedDict(
            [
                ("version", __version__),
                ("created", datetime.datetime.now(datetime.timezone.utc).isoformat()),
                ("wall_times", [round(t, 6) for t in wall_times]),
            ]
        )
        write_json(os.path.join(path, "metadata.json"), metadata)
        logger.info("%s: wrote %s into %s", command, ", ".join(sorted(files)), path)

    @staticmethod
    def _term_counts(solution):
        return [[len(phi) for phi in history] for history in solution.components]

    def solve(self):
        """
        Run the recursion to ``order`` and read the observables off phi~.
        @return dict {
            'Run dir'      : path,
            'Observables'  : ObservableSet,
            'Exact'        : ObservableSet or None,
            'Errors'       : OrderedDict label -> error, or None
        }
        """
        cfg = self.config
        solution = run_series(self.problem, cfg.order, cfg.c0, term_cap=cfg.term_cap)
        approx = partial_sums(solution, cfg.order)
        observables = extract_observables(self.problem, approx, cfg.precision_bits)
        exact = errors = None
        if self.problem.has_exact_solution:
            try:
                exact = exact_initial_values(self.problem, cfg.precision_bits)
                errors = observable_errors(self.problem, approx, cfg.precision_bits)
            except UnsupportedError:
                exact = errors = None
        path = self.run_dir(cfg.order, cfg.c0)
        write_json(
            os.path.join(path, "solution.json"), solution_to_dict(solution, self.problem.variables)
        )
        write_json(
            os.path.join(path, "observables.json"),
            observables_to_dict(observables, cfg.precision_bits, exact, errors),
        )
        self._finish(
            path,
            "solve",
            ["solution.json", "observables.json"],
            self._term_counts(solution),
            solution.timings,
        )
        return {"Run dir": path, "Observables": observables, "Exact": exact, "Errors": errors}

    def table(self):
        """
        Error table at ``orders``; writes report.csv/report.json and timing.csv.
        @return DiagnosticsReport
        """
        cfg = self.config
        if not cfg.orders:
            raise ConfigError("[-] Error: table needs a non-empty `orders` list.")
        spec = self.config.norm_spec(self.problem, EXACT_ERROR) if self.problem.has_exact_solution else None
        residual_spec = self.config.norm_spec(self.problem, OPERATOR_RESIDUAL) if cfg.residual else None
        report = reproduce_table(
            self.problem,
            cfg.orders,
            cfg.c0,
            spec=spec,
            residual_spec=residual_spec,
            precision_bits=cfg.precision_bits,
            term_cap=cfg.term_cap,
            with_residual=cfg.residual,
        )
        path = self.run_dir(max(cfg.orders), cfg.c0)
        files = ["timing.csv"]
        if "csv" in cfg.format:
            write_report_csv(os.path.join(path, "report.csv"), report)
            files.append("report.csv")
        if "json" in cfg.format:
            write_json(os.path.join(path, "report.json"), report_to_dict(report))
            files.append("report.json")
        write_timing_csv(os.path.join(path, "timing.csv"), report)
        if isinstance(self.problem, HighDimFbsde) and self.problem.d >= 3:
            dims = sorted(set(CPU_MODEL_DIMS) | set([self.problem.d]))
            write_cpu_models_csv(
                os.path.join(path, "cpu_models.csv"), [(d,) + cpu_time_models(d) for d in dims]
            )
            files.append("cpu_models.csv")
        self._finish(path, "table", files, None, [row.wall_time for row in report.rows])
        return report

    def sweep(self):
        """
        Operator residual over orders x c0 grid; writes sweep.csv and sweep_long.dat.
        @return SweepResult
        """
        cfg = self.config
        if not cfg.orders:
            raise ConfigError("[-] Error: sweep needs a non-empty `orders` list.")
        grid = cfg.c0_grid or (cfg.c0,)
        spec = self.config.norm_spec(self.problem, OPERATOR_RESIDUAL)
        result = sweep_c0(
            self.problem, cfg.orders, grid, spec, workers=cfg.workers, term_cap=cfg.term_cap
        )
        path = self.run_dir(max(cfg.orders), "sweep")
        write_sweep_csv(os.path.join(path, "sweep.csv"), result)
        write_sweep_long(os.path.join(path, "sweep_long.dat"), result)
        summary = OrderedDict(
            [
                ("window", [str(c) for c in convergence_window(result)]),
                (
                    "argmin",
                    OrderedDict((str(m), str(argmin_c0(result, m))) for m in result.orders if any(
                        v is not None for v in result.row(m)
                    )),
                ),
                ("failed", [[m, str(c0), msg] for m, c0, msg in result.failed]),
            ]
        )
        write_json(os.path.join(path, "summary.json"), summary)
        self._finish(path, "sweep", ["sweep.csv", "sweep_long.dat", "summary.json"], None, [])
        return result


def describe_errors(errors):
    """``[(label, formatted error)]`` for console output."""
    return [(label, format_sci(value)) for label, value in (errors or {}).items()]
