"""Command-line front end.

A thin client over the HTTP service: every subcommand builds a request,
sends it to the service (in-process by default, or to --server) and writes
the response payload under --out.  Exit codes: 0 success, 2 validation
error, 3 convergence error, 4 numerical error.
"""

import argparse
import json
import sys
from pathlib import Path

EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_NUMERICAL = 4

_EXIT_BY_KIND = {
    "validation": EXIT_VALIDATION,
    "convergence": EXIT_CONVERGENCE,
    "numerical": EXIT_NUMERICAL,
}


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _make_client(server):
    import httpx

    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # testclient import warns on some stacks
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(client, path, payload):
    import httpx

    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CommandError(EXIT_NUMERICAL, f"service unreachable: {exc}")
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        raise CommandError(EXIT_NUMERICAL, f"service failure: {resp.status_code}")
    if "error" in body:
        raise CommandError(
            _EXIT_BY_KIND.get(body["error"], EXIT_NUMERICAL), body.get("message", "")
        )
    # request-shape errors reported by the framework
    raise CommandError(EXIT_VALIDATION, json.dumps(body.get("detail", body)))


def _write_json(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path


def _write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _solution_dat(payload):
    nodes = [row[0] for row in payload["mesh"]["nodes"]]
    boundary = set(payload["mesh"]["boundary"])
    coefs = iter(payload["coefficients"])
    lines = []
    for i, x in enumerate(nodes):
        v = 0.0 if i in boundary else next(coefs)
        lines.append(f"{x:.17g} {v:.17g}")
    return "\n".join(lines) + "\n"


def _domain_payload(args):
    if getattr(args, "mesh", None):
        return {"mesh": json.loads(Path(args.mesh).read_text())}
    if args.dim == 1:
        return {
            "domain": {"dim": 1, "a": args.a, "b": args.b, "nodes": args.nodes}
        }
    return {"domain": {"dim": 2, "radius": args.radius, "level": args.level}}


def _add_domain_flags(sub, nodes_default=64):
    sub.add_argument("--dim", type=int, default=1, choices=(1, 2))
    sub.add_argument("--a", type=float, default=-1.0)
    sub.add_argument("--b", type=float, default=1.0)
    sub.add_argument("--nodes", type=int, default=nodes_default)
    sub.add_argument("--radius", type=float, default=1.0)
    sub.add_argument("--level", type=int, default=2)
    sub.add_argument("--mesh", type=str, default=None, help="mesh JSON file")


def _add_common(sub):
    sub.add_argument("--out", type=str, required=True, help="output directory")
    sub.add_argument("--server", type=str, default=None, help="remote service URL")


def build_parser():
    ap = argparse.ArgumentParser(prog="fracfem")
    subs = ap.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("mesh-gen", help="generate a mesh file")
    _add_domain_flags(sp)
    _add_common(sp)

    sp = subs.add_parser("assemble", help="assemble and store the Gram pair")
    _add_domain_flags(sp)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--v-const", type=float, default=0.0)
    _add_common(sp)

    sp = subs.add_parser("eigen", help="smallest eigenpairs report")
    _add_domain_flags(sp, nodes_default=256)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--v-const", type=float, default=0.0)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--tol", type=float, default=1e-10)
    _add_common(sp)

    sp = subs.add_parser("solve-linear", help="solve the constant-source problem")
    _add_domain_flags(sp, nodes_default=512)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--v-const", type=float, default=0.0)
    sp.add_argument("--f-const", type=float, default=1.0)
    _add_common(sp)

    for name, help_text in (
        ("ground-state", "mountain-pass ground state"),
        ("nodal", "least-energy nodal solution"),
    ):
        sp = subs.add_parser(name, help=help_text)
        _add_domain_flags(sp, nodes_default=512)
        sp.add_argument("--s", type=float, required=True)
        sp.add_argument("--p", type=float, default=4.0)
        sp.add_argument("--v-const", type=float, default=0.0)
        sp.add_argument("--lam", type=float, default=1.0)
        sp.add_argument("--tol", type=float, default=1e-2)
        sp.add_argument("--max-iter", type=int, default=2000)
        _add_common(sp)

    sp = subs.add_parser("converge", help="convergence table vs the closed form")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--sizes", type=str, default="32,64,128,256,512,1024")
    _add_common(sp)

    sp = subs.add_parser("limit", help="study of eigenvalue-scaled solves as p -> 2")
    _add_domain_flags(sp, nodes_default=256)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--which", type=int, default=1, choices=(1, 2))
    sp.add_argument("--p-seq", type=str, default="3,2.5,2.1,2.05")
    sp.add_argument("--v-const", type=float, default=0.0)
    sp.add_argument("--tol", type=float, default=1e-2)
    _add_common(sp)

    sp = subs.add_parser("symmetry", help="reflection/rotation classification")
    sp.add_argument("--solution", type=str, required=True, help="solution JSON file")
    sp.add_argument("--axis", type=str, default="x")
    _add_common(sp)

    sp = subs.add_parser("table", help="solution characteristics per s")
    sp.add_argument("--s-values", type=str, required=True)
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--nodes", type=int, default=512)
    sp.add_argument("--tol", type=float, default=1e-2)
    sp.add_argument("--max-iter", type=int, default=2000)
    _add_common(sp)

    sp = subs.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", type=str, default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8711)
    return ap


def _floats(text):
    return [float(tok) for tok in text.split(",") if tok]


def _ints(text):
    return [int(tok) for tok in text.split(",") if tok]


def run_command(args):
    out = Path(args.out) if getattr(args, "out", None) else None
    client = _make_client(args.server) if args.command != "serve" else None

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return

    if args.command == "mesh-gen":
        payload = _domain_payload(args)
        if "mesh" in payload:
            raise CommandError(EXIT_VALIDATION, "mesh-gen builds meshes, not reads them")
        data = _post(client, "/mesh-gen", payload)
        print(_write_json(out / "mesh.json", data))

    elif args.command == "assemble":
        payload = {**_domain_payload(args), "s": args.s, "v_const": args.v_const}
        data = _post(client, "/assemble", payload)
        print(_write_json(out / "system.json", data))

    elif args.command == "eigen":
        payload = {
            **_domain_payload(args),
            "s": args.s,
            "v_const": args.v_const,
            "k": args.k,
            "tol": args.tol,
        }
        data = _post(client, "/eigen", payload)
        refs = []
        for idx, coefs in enumerate(data["phis"], start=1):
            sol = {"mesh": data["mesh"], "coefficients": coefs, "s": args.s,
                   "p": None, "energy": None, "grad_norm": None}
            ref = f"phi_{idx}.json"
            _write_json(out / ref, sol)
            if data["mesh"]["dim"] == 1:
                _write_text(out / f"phi_{idx}.dat", _solution_dat(sol))
            refs.append(ref)
        report = {
            "lambdas": data["lambdas"],
            "residuals": data["residuals"],
            "phis": refs,
            "second_eigenvalue_multiple": data["second_eigenvalue_multiple"],
        }
        print(_write_json(out / "eigen.json", report))

    elif args.command == "solve-linear":
        payload = {
            **_domain_payload(args),
            "s": args.s,
            "v_const": args.v_const,
            "f_const": args.f_const,
        }
        data = _post(client, "/solve-linear", payload)
        _write_json(out / "solution.json", data)
        if data["mesh"]["dim"] == 1:
            _write_text(out / "solution.dat", _solution_dat(data))
        print(out / "solution.json")

    elif args.command in ("ground-state", "nodal"):
        payload = {
            **_domain_payload(args),
            "s": args.s,
            "p": args.p,
            "v_const": args.v_const,
            "lam": args.lam,
            "tol": args.tol,
            "max_iter": args.max_iter,
        }
        data = _post(client, "/" + args.command, payload)
        wall_time = data.pop("wall_time", None)  # keep data files reproducible
        stem = args.command.replace("-", "_")
        _write_json(out / f"{stem}.json", data)
        if data["mesh"]["dim"] == 1:
            _write_text(out / f"{stem}.dat", _solution_dat(data))
        print(out / f"{stem}.json")
        print(f"energy={data['energy']:.6g} max={data['max']:.6g} "
              f"min={data['min']:.6g} grad_norm={data['grad_norm']:.3g} "
              f"seconds={wall_time:.3g}")

    elif args.command == "converge":
        payload = {"s": args.s, "sizes": _ints(args.sizes)}
        data = _post(client, "/converge", payload)
        lines = ["m,err_h,err_l2"]
        lines += [f"{r['m']},{r['err_h']:.17g},{r['err_l2']:.17g}" for r in data["rows"]]
        _write_text(out / "converge.csv", "\n".join(lines) + "\n")
        _write_json(out / "converge.json", data)
        print(out / "converge.json")
        print(f"slope_h={data['slope_h']:.4f} slope_l2={data['slope_l2']:.4f}")

    elif args.command == "limit":
        payload = {
            **_domain_payload(args),
            "s": args.s,
            "which": args.which,
            "p_sequence": _floats(args.p_seq),
            "v_const": args.v_const,
            "tol": args.tol,
        }
        data = _post(client, "/limit", payload)
        _write_text(out / "limit.csv", data.pop("csv"))
        mesh = data.pop("mesh")
        if mesh["dim"] == 1:
            xs = [row[0] for row in mesh["nodes"]][1:-1]  # interior nodes
            for row in data["rows"]:
                ratio = row.pop("ratio", None)
                if ratio is not None:
                    lines = [f"{x:.17g} {v:.17g}" for x, v in zip(xs, ratio)]
                    _write_text(out / f"ratio_p{row['p']:g}.dat", "\n".join(lines) + "\n")
        _write_json(out / "limit.json", data)
        print(out / "limit.json")

    elif args.command == "symmetry":
        solution = json.loads(Path(args.solution).read_text())
        data = _post(client, "/symmetry", {"solution": solution, "axis": args.axis})
        _write_json(out / "symmetry.json", data)
        print(out / "symmetry.json")
        print(f"classification={data['classification']} residual={data['residual']:.4g}")

    elif args.command == "table":
        payload = {
            "s_values": _floats(args.s_values),
            "p": args.p,
            "nodes": args.nodes,
            "tol": args.tol,
            "max_iter": args.max_iter,
        }
        data = _post(client, "/table", payload)
        _write_json(out / "table.json", data)
        header = f"{'s':>6} {'E(u1)':>10} {'max u1':>8} {'E(u2)':>10} {'max u2':>8} {'min u2':>8}"
        rows = [header]
        for r in data["rows"]:
            rows.append(
                f"{r['s']:>6.2f} {r['energy_ground']:>10.4f} {r['max_ground']:>8.3f} "
                f"{r['energy_nodal']:>10.4f} {r['max_nodal']:>8.3f} {r['min_nodal']:>8.3f}"
            )
        _write_text(out / "table.txt", "\n".join(rows) + "\n")
        print(out / "table.txt")
        print("\n".join(rows))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run_command(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
