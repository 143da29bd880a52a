"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric or validation
error.
"""

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from .analysis import AnalysisConfig, analyze
from .phasederiv import ConfigurationError
from .prune import CellClass, classify_values
from .reassign import DEFAULT_THRESHOLD_DB, Backend
from .render import DEFAULT_FLOOR_DB, pgm_bytes, rasterize
from .signal_io import SignalSpec, WavError, generate, read_wav, write_wav
from .windows import WindowSpec, build_window_set, samples_for_duration

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

CSV_HEADER = (
    "nominal_time_s",
    "nominal_freq_hz",
    "t_hat_s",
    "f_hat_hz",
    "mag",
    "power_db",
    "phase_rad",
    "mixed_partial",
    "class",
)
WINDOW_HEADER = ("index", "h", "h_T", "h_D", "h_TD", "h_T2", "h_D2")

SYNTH_KINDS = ("sinusoid", "chirp", "impulse", "pluck", "noise")


class UsageError(Exception):
    pass


class InputError(Exception):
    """Unreadable or malformed input file (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    return f"{v:.9g}"


def _class_name(code):
    return CellClass(int(code)).name.lower()


def _parse_keep(text):
    if text.strip() == "":
        return set()
    out = set()
    for part in text.split(","):
        try:
            out.add(CellClass.parse(part))
        except KeyError:
            raise UsageError(f"unknown class {part.strip()!r} in --keep") from None
    return out


# --- shared flag groups ----------------------------------------------------


def _add_synth_flags(p, required_kind):
    g = p.add_argument_group("synthetic signal")
    g.add_argument("--kind", choices=SYNTH_KINDS, required=required_kind, help="signal kind")
    g.add_argument("--f0", type=float, default=1000.0, help="frequency, chirp start or fundamental in Hz (default 1000)")
    g.add_argument("--f1", type=float, default=None, help="chirp end frequency in Hz")
    g.add_argument("--rate", type=float, default=44100.0, help="sample rate in Hz (default 44100)")
    g.add_argument("--dur", type=float, default=1.0, help="duration in s (default 1.0)")
    g.add_argument("--amp", type=float, default=1.0, help="amplitude (default 1.0)")
    g.add_argument("--phase", type=float, default=0.0, help="sinusoid phase in rad (default 0)")
    g.add_argument("--index", type=int, default=0, help="impulse sample index (default 0)")
    g.add_argument("--partials", type=int, default=10, help="pluck partial count (default 10)")
    g.add_argument("--decay", type=float, default=0.5, help="pluck fundamental decay time in s (default 0.5)")
    g.add_argument("--onset", type=float, default=0.0, help="pluck onset time in s (default 0)")
    g.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")


def _synth_spec(args):
    return SignalSpec(
        kind=args.kind,
        duration=args.dur,
        sample_rate=args.rate,
        amplitude=args.amp,
        frequency=args.f0,
        end_frequency=args.f1,
        phase=args.phase,
        index=args.index,
        partials=args.partials,
        decay=args.decay,
        onset=args.onset,
        seed=args.seed,
    )


def _add_analysis_flags(p):
    g = p.add_argument_group("analysis")
    g.add_argument("--window", choices=("kaiser", "hann"), default="kaiser", help="window kind (default kaiser)")
    g.add_argument("--length", type=int, default=1001, help="window length in samples (default 1001)")
    g.add_argument("--length-ms", type=float, default=None, help="window length in ms; overrides --length")
    g.add_argument("--beta", type=float, default=12.0, help="Kaiser shape parameter (default 12)")
    g.add_argument("--hop", type=int, default=None, help="hop in samples (default length/8)")
    g.add_argument("--fft-size", type=int, default=None, help="transform size (default next power of two >= 2*length)")
    g.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB, help="emit cells within this many dB of the frame peak (default -70)")
    g.add_argument("--backend", choices=[b.value for b in Backend], default="transform", help="reassignment backend (default transform)")
    g.add_argument("--tol-sin", type=float, default=0.2, help="sinusoid tolerance on |1 + mixed| (default 0.2)")
    g.add_argument("--tol-imp", type=float, default=0.2, help="impulse tolerance on |mixed| (default 0.2)")
    g.add_argument("--workers", type=int, default=1, help="FFT worker threads (default 1)")


def _config(args):
    return AnalysisConfig(
        window=args.window,
        length=args.length,
        length_ms=args.length_ms,
        beta=args.beta,
        hop=args.hop,
        fft_size=args.fft_size,
        threshold_db=args.threshold_db,
        backend=Backend(args.backend),
        tol_sin=args.tol_sin,
        tol_imp=args.tol_imp,
        workers=args.workers,
    )


# --- CSV -------------------------------------------------------------------


def analysis_rows(result):
    s = result.spectrogram
    two_pi = 2.0 * np.pi
    for i in range(len(s)):
        yield (
            _fmt(s.nominal_time[i]),
            _fmt(s.nominal_freq[i] / two_pi),
            _fmt(s.t_hat[i]),
            _fmt(s.omega_hat[i] / two_pi),
            _fmt(s.magnitude[i]),
            _fmt(s.power_db[i]),
            _fmt(s.corrected_phase[i]),
            _fmt(s.mixed_partial[i]),
            _class_name(result.classes[i]),
        )


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_points_csv(path):
    """Rows of an analysis CSV as a list of dicts (strings kept as read)."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise InputError(f"{path}: unexpected CSV header")
            return list(reader)
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not a text CSV file") from exc


def _column(rows, name, path):
    try:
        return np.array([float(r[name]) for r in rows])
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad value in column {name}") from exc


# --- commands ----------------------------------------------------------------


def _load_signal(args):
    if args.input is not None and args.kind is not None:
        raise UsageError("give either an input file or --kind, not both")
    if args.input is None:
        if args.kind is None:
            raise UsageError("need an input WAV file or --kind for a synthetic signal")
        return generate(_synth_spec(args))
    return read_wav(args.input)


def cmd_analyze(args):
    result = analyze(_load_signal(args), _config(args))
    _write_csv(args.out, CSV_HEADER, analysis_rows(result))
    return EXIT_OK


def cmd_render(args):
    src = args.input
    if src.lower().endswith(".csv"):
        rows = read_points_csv(src)
        t = _column(rows, "t_hat_s", src)
        f = _column(rows, "f_hat_hz", src)
        power = _column(rows, "mag", src) ** 2
        t_default = (float(t.min()), float(t.max())) if len(t) else (0.0, 1.0)
        f_default = (0.0, float(f.max())) if len(f) else (0.0, 1.0)
    else:
        signal = read_wav(src)
        s = analyze(signal, _config(args)).spectrogram
        t, f, power = s.t_hat, s.omega_hat / (2 * np.pi), s.magnitude**2
        t_default = (0.0, signal.duration)
        f_default = (0.0, signal.sample_rate / 2)
    t_range = (
        t_default[0] if args.t_min is None else args.t_min,
        t_default[1] if args.t_max is None else args.t_max,
    )
    f_range = (
        f_default[0] if args.f_min is None else args.f_min,
        f_default[1] if args.f_max is None else args.f_max,
    )
    if t_range[1] <= t_range[0]:
        t_range = (t_range[0], t_range[0] + 1.0)
    if f_range[1] <= f_range[0]:
        f_range = (f_range[0], f_range[0] + 1.0)
    image = rasterize(t, f, power, args.width, args.height, t_range, f_range)
    if len(t) == 0:
        print("warning: no points to render; writing a floor image", file=sys.stderr)
    if image.dropped:
        print(f"{image.dropped} point(s) outside the raster range dropped", file=sys.stderr)
    Path(args.out).write_bytes(pgm_bytes(image.gray(args.floor_db)))
    return EXIT_OK


def cmd_prune(args):
    keep = _parse_keep(args.keep)
    rows = read_points_csv(args.input)
    mixed = _column(rows, "mixed_partial", args.input)
    classes = classify_values(mixed, args.tol_sin, args.tol_imp)
    wanted = {int(k) for k in keep}
    out = []
    for row, code in zip(rows, classes):
        if int(code) in wanted:
            row = dict(row, **{"class": _class_name(code)})
            out.append(tuple(row[h] for h in CSV_HEADER))
    _write_csv(args.out, CSV_HEADER, out)
    return EXIT_OK


def cmd_windows(args):
    if args.length_ms is not None:
        length = samples_for_duration(args.length_ms / 1000.0, args.rate)
    else:
        length = args.length
    ws = build_window_set(WindowSpec(args.kind, length, kaiser_beta=args.beta, sample_period=1.0 / args.rate))
    cols = [ws.h, ws.h_T, ws.h_D, ws.h_TD, ws.h_T2, ws.h_D2]
    rows = ((str(i),) + tuple(f"{c[i]:.17g}" for c in cols) for i in range(length))
    _write_csv(args.out, WINDOW_HEADER, rows)
    return EXIT_OK


def cmd_synth(args):
    write_wav(generate(_synth_spec(args)), args.out, args.format)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="tfreassign", description="Reassigned spectrogram analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="reassign a signal and write points as CSV")
    p.add_argument("input", nargs="?", default=None, help="input WAV file (omit when using --kind)")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout (default -)")
    _add_analysis_flags(p)
    _add_synth_flags(p, required_kind=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("render", help="render points (CSV) or a WAV file to a PGM image")
    p.add_argument("input", help="analysis CSV (*.csv) or WAV file")
    p.add_argument("--out", required=True, help="output PGM path")
    p.add_argument("--width", type=int, default=800, help="image width in pixels (default 800)")
    p.add_argument("--height", type=int, default=600, help="image height in pixels (default 600)")
    p.add_argument("--t-min", type=float, default=None, help="left edge in s (default: data or 0)")
    p.add_argument("--t-max", type=float, default=None, help="right edge in s (default: data or duration)")
    p.add_argument("--f-min", type=float, default=None, help="bottom edge in Hz (default 0)")
    p.add_argument("--f-max", type=float, default=None, help="top edge in Hz (default: data max or Nyquist)")
    p.add_argument("--floor-db", type=float, default=DEFAULT_FLOOR_DB, help="gray level 0 in dB below the brightest pixel (default -80)")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("prune", help="keep only points of the given classes")
    p.add_argument("input", help="analysis CSV")
    p.add_argument("--keep", default="sinusoid,impulse", help="comma-separated classes: sinusoid, impulse, neither (default sinusoid,impulse)")
    p.add_argument("--tol-sin", type=float, default=0.2, help="sinusoid tolerance (default 0.2)")
    p.add_argument("--tol-imp", type=float, default=0.2, help="impulse tolerance (default 0.2)")
    p.add_argument("--out", default="-", help="output CSV path (default -)")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("windows", help="write a window and its auxiliary windows as CSV")
    p.add_argument("--kind", choices=("kaiser", "hann"), default="kaiser", help="window kind (default kaiser)")
    p.add_argument("--length", type=int, default=1001, help="length in samples (default 1001)")
    p.add_argument("--length-ms", type=float, default=None, help="length in ms, rounded to the nearest odd count; overrides --length")
    p.add_argument("--rate", type=float, default=44100.0, help="sample rate in Hz (default 44100)")
    p.add_argument("--beta", type=float, default=12.0, help="Kaiser shape parameter (default 12)")
    p.add_argument("--out", default="-", help="output CSV path (default -)")
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("synth", help="write a synthetic test signal as WAV")
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--format", choices=("float32", "pcm16"), default="float32", help="sample format (default float32)")
    _add_synth_flags(p, required_kind=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tfreassign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, WavError, InputError) as exc:
        print(f"tfreassign: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ConfigurationError, FloatingPointError) as exc:
        print(f"tfreassign: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
