"""Command-line front end: a thin client over the experiment service.

Every subcommand builds a request model, sends it to the service (an
in-process ASGI call by default, or a remote server via --server), and
renders the response as a deterministic JSON or CSV report.

Exit codes: 0 success, 2 usage error, 3 assertion failure, 4 capacity.
The --threads flag caps worker count (mirrored by TRACEFN_LAB_THREADS)
without changing any output.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import sys
from typing import Optional

import httpx

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ASSERTION = 3
EXIT_CAPACITY = 4


def _post(path: str, payload: dict, server: Optional[str]) -> tuple[int, dict]:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.post(path, json=payload)
            return resp.status_code, resp.json()

    async def _call():
        from .service.app import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://tracefn-lab",
                                     timeout=None) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()

    return asyncio.run(_call())


def _emit(report: dict, args) -> None:
    from .reporting import dump_csv, dump_json

    fmt = getattr(args, "format", "json")
    out = getattr(args, "out", None)
    if fmt == "csv":
        rows = report.get("data", {}).get("rows")
        if not rows:
            rows = report.get("checks", [])
        text = dump_csv(rows, out)
    else:
        text = dump_json(report, out)
    if out:
        print(f"report written to {out}")
    else:
        sys.stdout.write(text)


def _finish(status_code: int, report: dict, args) -> int:
    if status_code == 422 and report.get("error") == "capacity":
        print(f"capacity: {report['message']}", file=sys.stderr)
        return EXIT_CAPACITY
    if status_code >= 400:
        print(f"error: {report.get('message', report)}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report, args)
    if report.get("status") == "fail":
        for check in report.get("checks", []):
            if not check["passed"]:
                print(f"FAIL {check['name']}: value {check['value']:.6g} vs "
                      f"bound {check['bound']:.6g} [{check['reference']}]",
                      file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0x5EEDF00D)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap; TRACEFN_LAB_THREADS is the env mirror")
    p.add_argument("--out", type=str, default=None, help="report file path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--server", type=str, default=os.environ.get("TRACEFN_LAB_SERVER"),
                   help="remote service URL (default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tracefn-lab",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="exact-identity suites")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--deep", action="store_true",
                   help="full acceptance sweeps (slower)")
    _add_common(p)

    p = sub.add_parser("bounds", help="sup-norm and completion-method ratios")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--family", action="append", dest="families",
                   choices=("kl2", "legendre", "inverse_phase"))
    p.add_argument("--deep", action="store_true")
    _add_common(p)

    p = sub.add_parser("satotate", help="equidistribution surveys")
    p.add_argument("--family", required=True,
                   choices=("kl2", "salie", "birch", "gauss"))
    p.add_argument("--q", type=int, nargs="+", required=True, dest="q_grid")
    _add_common(p)

    p = sub.add_parser("vdc", help="bimodular van der Corput ratios")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N-grid", type=float, nargs="*", default=None,
                   help="unused lengths default to (pq)^(2/3)")
    _add_common(p)

    p = sub.add_parser("burgess", help="shifted-fraction complete sums")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--B", type=int, default=10)
    p.add_argument("--char", type=int, default=None, dest="m")
    p.add_argument("--box-lo", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("abshift", help="+ab-shift sums and completions")
    p.add_argument("--family", default="inv_plus_x", choices=("inv_plus_x", "kl3"))
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--N", type=float, default=100.0)
    p.add_argument("--l", type=int, default=2)
    _add_common(p)

    p = sub.add_parser("khan-ngo", help="4-fold Kloosterman product sums")
    p.add_argument("--q", type=int, default=499)
    p.add_argument("--lmax", type=int, default=8)
    _add_common(p)

    p = sub.add_parser("dap", help="divisor functions in progressions")
    p.add_argument("--k", type=int, required=True, choices=(2, 3))
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("primesum", help="trace functions against primes")
    p.add_argument("--family", default="kl2", choices=("kl2", "inverse_phase"))
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--X", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("horizontal", help="fixed-parameter angles over moduli")
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--a", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("calibrate", help="recompute observed ratio maxima")
    p.add_argument("--suite", action="append", dest="suites", required=True)
    p.add_argument("--manifest-out", type=str, default=None)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8710)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None):
        os.environ["TRACEFN_LAB_THREADS"] = str(args.threads)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    if args.command == "identities":
        payload = {"q": args.q, "deep": args.deep, "seed": args.seed,
                   "threads": args.threads}
        return _finish(*_post("/identities", payload, args.server), args)

    if args.command == "bounds":
        payload = {"q": args.q, "deep": args.deep, "seed": args.seed,
                   "threads": args.threads}
        if args.families:
            payload["families"] = args.families
        return _finish(*_post("/bounds", payload, args.server), args)

    if args.command == "satotate":
        payload = {"family": args.family, "q_grid": args.q_grid,
                   "seed": args.seed, "threads": args.threads}
        return _finish(*_post("/satotate", payload, args.server), args)

    if args.command == "vdc":
        payload = {"pairs": [(args.p, args.q)], "seed": args.seed,
                   "threads": args.threads, "N_grid": args.N_grid}
        return _finish(*_post("/vdc", payload, args.server), args)

    if args.command == "burgess":
        payload = {"q": args.q, "l": args.l, "B": args.B, "m": args.m,
                   "box_lo": args.box_lo, "seed": args.seed,
                   "threads": args.threads}
        return _finish(*_post("/burgess", payload, args.server), args)

    if args.command == "abshift":
        payload = {"q": args.q, "family": args.family, "M": args.M,
                   "N": args.N, "l": args.l, "seed": args.seed,
                   "threads": args.threads}
        return _finish(*_post("/abshift", payload, args.server), args)

    if args.command == "khan-ngo":
        payload = {"q": args.q, "lmax": args.lmax, "seed": args.seed}
        return _finish(*_post("/khan-ngo", payload, args.server), args)

    if args.command == "dap":
        payload = {"k": args.k, "X": args.X, "q": args.q, "a": args.a,
                   "seed": args.seed}
        return _finish(*_post("/dap", payload, args.server), args)

    if args.command == "primesum":
        payload = {"q": args.q, "X": args.X, "family": args.family,
                   "seed": args.seed}
        return _finish(*_post("/primesum", payload, args.server), args)

    if args.command == "horizontal":
        payload = {"X": args.X, "a": args.a, "seed": args.seed}
        return _finish(*_post("/horizontal", payload, args.server), args)

    if args.command == "calibrate":
        payload = {"suites": args.suites, "seed": args.seed,
                   "threads": args.threads}
        code, manifest = _post("/calibrate", payload, args.server)
        if code >= 400:
            return _finish(code, manifest, args)
        from .reporting import dump_json

        text = dump_json(manifest, args.manifest_out)
        if args.manifest_out:
            print(f"manifest written to {args.manifest_out}")
        else:
            sys.stdout.write(text)
        return EXIT_OK

    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
