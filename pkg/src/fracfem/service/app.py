"""HTTP service exposing the solver operations.

All endpoints are synchronous compute calls: the request carries the problem
data, the response carries the full result (meshes and solutions inline), so
the service holds no state between calls.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import runs
from ..errors import (
    ConvergenceError,
    DomainError,
    FracFemError,
)
from ..mesh import mesh_to_dict
from . import schemas

app = FastAPI(title="fracfem", version="0.1.0")


@app.exception_handler(FracFemError)
async def _solver_error(request: Request, exc: FracFemError):
    if isinstance(exc, DomainError):
        kind, status = "validation", 422
    elif isinstance(exc, ConvergenceError):
        kind, status = "convergence", 409
    else:
        kind, status = "numerical", 500
    return JSONResponse(status_code=status, content={"error": kind, "message": str(exc)})


def _mesh_from(req):
    mesh_data = req.mesh.model_dump() if req.mesh is not None else None
    domain = (req.domain or schemas.DomainSpec()).model_dump()
    if mesh_data is not None:
        return runs.resolve_mesh(mesh_data)
    return runs.build_mesh(**domain)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/mesh-gen", response_model=schemas.MeshModel)
def mesh_gen(req: schemas.MeshRequest):
    mesh = runs.build_mesh(**req.domain.model_dump())
    return mesh_to_dict(mesh)


@app.post("/assemble", response_model=schemas.SystemModel)
def assemble(req: schemas.AssembleRequest):
    return runs.run_assemble(_mesh_from(req), req.s, req.v_const)


@app.post("/eigen", response_model=schemas.EigenResponse)
def eigen(req: schemas.EigenRequest):
    return runs.run_eigen(_mesh_from(req), req.s, req.k, req.v_const, req.tol)


@app.post("/solve-linear", response_model=schemas.SolutionModel)
def solve_linear(req: schemas.LinearSolveRequest):
    return runs.run_solve_linear(_mesh_from(req), req.s, req.f_const, req.v_const)


@app.post("/ground-state", response_model=schemas.SolutionModel)
def ground_state(req: schemas.NonlinearSolveRequest):
    return runs.run_ground_state(
        _mesh_from(req), req.s, req.p, req.v_const, req.lam, req.tol, req.max_iter
    )


@app.post("/nodal", response_model=schemas.SolutionModel)
def nodal(req: schemas.NonlinearSolveRequest):
    return runs.run_nodal(
        _mesh_from(req), req.s, req.p, req.v_const, req.lam, req.tol, req.max_iter
    )


@app.post("/converge", response_model=schemas.ConvergeResponse)
def converge(req: schemas.ConvergeRequest):
    return runs.run_converge(req.s, req.sizes)


@app.post("/limit", response_model=schemas.LimitResponse)
def limit(req: schemas.LimitRequest):
    return runs.run_limit(
        _mesh_from(req), req.s, req.which, req.p_sequence, req.v_const,
        req.tol, req.max_iter,
    )


@app.post("/symmetry", response_model=schemas.SymmetryResponse)
def symmetry_endpoint(req: schemas.SymmetryRequest):
    return runs.run_symmetry(req.solution.model_dump(), req.axis)


@app.post("/table", response_model=schemas.TableResponse)
def table(req: schemas.TableRequest):
    return runs.run_table(req.s_values, req.p, req.nodes, req.tol, max_iter=req.max_iter)
