"""Command line client for the soswall service.

Every subcommand builds a typed request and sends it through the same
request/response models the HTTP service uses: in-process by default, or
to a running server with --server URL.  Output files land in the directory
given by --out-dir or the SOSWALL_OUT_DIR environment variable (default:
current directory).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import SoswallError
from .runspec import parse_spec, resolve_params_keys
from .service import models as m
from .service.app import (
    handle_chalker,
    handle_free_energy,
    handle_oracle,
    handle_scan,
    handle_simulate,
    handle_verify,
    handle_windows,
)

ENV_OUT_DIR = "SOSWALL_OUT_DIR"

_LOCAL = {
    "/chalker": (handle_chalker, m.ChalkerRequest),
    "/windows": (handle_windows, m.WindowsRequest),
    "/free-energy": (handle_free_energy, m.FreeEnergyRequest),
    "/verify-coefficients": (handle_verify, m.VerifyRequest),
    "/scan": (handle_scan, m.ScanRequest),
    "/simulate": (handle_simulate, m.SimulateRequest),
    "/oracle": (handle_oracle, m.OracleRequest),
}

_RESPONSES = {
    "/chalker": m.ChalkerResponse,
    "/windows": m.WindowsResponse,
    "/free-energy": m.FreeEnergyResponse,
    "/verify-coefficients": m.VerifyResponse,
    "/scan": m.ScanResponse,
    "/simulate": m.SimulateResponse,
    "/oracle": m.OracleResponse,
}


def dispatch(server: str | None, path: str, request):
    if server is None:
        handler, _ = _LOCAL[path]
        return handler(request)
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=request.model_dump(), timeout=None)
    resp.raise_for_status()
    return _RESPONSES[path].model_validate(resp.json())


def _out_path(args, name: str) -> Path:
    base = Path(args.out_dir or os.environ.get(ENV_OUT_DIR, "."))
    base.mkdir(parents=True, exist_ok=True)
    return base / name


def _grid(spec: str) -> list[float]:
    lo, hi, count = spec.split(":")
    lo, hi, count = float(lo), float(hi), int(count)
    if count < 1:
        raise ValueError("grid count must be positive")
    if count == 1:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def cmd_verify(args) -> int:
    resp = dispatch(args.server, "/verify-coefficients", m.VerifyRequest(k=args.k, order=args.order))
    print(resp.table, end="")
    print("PASS" if resp.exit_code == 0 else f"exit {resp.exit_code}")
    return resp.exit_code


def cmd_free_energy(args) -> int:
    req = m.FreeEnergyRequest(level=args.level, k=args.k, order=args.order, t=args.t, u=args.u)
    resp = dispatch(args.server, "/free-energy", req)
    sys.stdout.write(resp.dump)
    if resp.value is not None:
        print(f"value {resp.value:.15g}")
    if args.dump:
        path = _out_path(args, args.dump)
        path.write_text(resp.dump)
        print(f"wrote {path}")
    return 0


def cmd_windows(args) -> int:
    resp = dispatch(args.server, "/windows", m.WindowsRequest(t=args.t, epsilon=args.epsilon, n_max=args.nmax))
    print("n,u_lo,u_hi")
    for w in resp.windows:
        print(f"{w.n},{w.u_lo:.12g},{w.u_hi:.12g}")
    return 0


def cmd_chalker(args) -> int:
    rows = ["J,K,beta,beta_inv,u,classification"]
    for K in _grid(args.K_grid):
        for beta in _grid(args.beta_grid):
            resp = dispatch(args.server, "/chalker", m.ChalkerRequest(J=args.J, K=K, beta=beta))
            rows.append(
                f"{args.J:.12g},{K:.12g},{beta:.12g},{1/beta:.12g},{resp.u:.12g},{resp.classification}"
            )
    text = "\n".join(rows) + "\n"
    if args.out:
        path = _out_path(args, args.out)
        path.write_text(text)
        print(f"wrote {path} ({len(rows) - 1} rows)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_scan(args) -> int:
    spec = parse_spec(Path(args.spec).read_text(), "scan")
    out_name = spec.pop("out", None)
    req = m.ScanRequest(**spec)
    resp = dispatch(args.server, "/scan", req)
    if out_name:
        path = _out_path(args, out_name)
        path.write_text(resp.csv)
        print(f"wrote {path} ({resp.n_points} points)")
    else:
        sys.stdout.write(resp.csv)
    return 0


def cmd_simulate(args) -> int:
    spec = parse_spec(Path(args.spec).read_text(), "simulate")
    t, u, J = resolve_params_keys(spec)
    if args.seed is not None:
        spec["seed"] = args.seed
    out_name = spec.pop("out", None)
    spec.pop("dump", None)  # raw dumps are a library feature, not wired here
    for key in ("t", "u", "J", "K", "beta"):
        spec.pop(key, None)
    req = m.SimulateRequest(t=t, u=u, J=J, **spec)
    resp = dispatch(args.server, "/simulate", req)
    if out_name:
        path = _out_path(args, out_name)
        path.write_text(resp.csv)
        print(f"wrote {path}")
    else:
        sys.stdout.write(resp.csv)
    return 0


def cmd_oracle(args) -> int:
    spec = parse_spec(Path(args.spec).read_text(), "oracle")
    t, u, J = resolve_params_keys(spec)
    for key in ("t", "u", "J", "K", "beta"):
        spec.pop(key, None)
    req = m.OracleRequest(t=t, u=u, J=J, **spec)
    resp = dispatch(args.server, "/oracle", req)
    print(f"log_z {resp.log_z:.15g}")
    print(f"z {resp.z:.15g}")
    print("z_level,probability,rho_z")
    for z, (p, r) in enumerate(zip(resp.level_distribution, resp.rho_z)):
        print(f"{z},{p:.12g},{r:.12g}")
    return 0


def cmd_serve(args) -> int:
    try:
        import uvicorn
    except ImportError:
        print("serve requires uvicorn (pip install soswall[serve])", file=sys.stderr)
        return 1
    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soswall")
    parser.add_argument("--server", default=None, help="service URL; default runs in-process")
    parser.add_argument("--out-dir", default=None, help=f"output directory (or ${ENV_OUT_DIR})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-coefficients", help="check named series coefficients")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--order", type=int, default=7)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("free-energy", help="restricted free energy series")
    p.add_argument("--h", dest="level", type=int, required=True)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--u", type=float, default=None)
    p.add_argument("--dump", default=None, help="also write the series to this file")
    p.set_defaults(func=cmd_free_energy)

    p = sub.add_parser("windows", help="layering windows in u at fixed t")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--nmax", type=int, default=4)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("chalker", help="classify a (K, beta) grid")
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--beta-grid", required=True, help="lo:hi:count")
    p.add_argument("--K-grid", required=True, help="lo:hi:count")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_chalker)

    p = sub.add_parser("scan", help="phase scan from a run-spec file")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="Monte Carlo run from a run-spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact small-box oracle from a run-spec file")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SoswallError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
