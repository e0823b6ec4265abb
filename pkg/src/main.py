import logging
import os

from fastapi import FastAPI, HTTPException, Query, status
from fastapi.responses import JSONResponse

from src import trajectory
from src.audit_logger import AuditLogger
from src.config_loader import ConfigError, ConfigLoader, ScenarioConfig
from src.errors import NumericalError, ValidationError
from src.feasibility import check_ftl_chain, derive_constants

logger = logging.getLogger(__name__)

app = FastAPI(title="Gravity Chain")

_config_path = os.environ.get("GRAVITY_CHAIN_CONFIG", "config.yml")
config = ConfigLoader().load_config(_config_path) if os.path.isfile(_config_path) else ConfigLoader().default_config()
audit_logger = AuditLogger(config["audit"]["path"], config["audit"]["enabled"])


@app.get("/")
async def health():
    return {"status": "ok", "unit_mode": config["units"]["mode"]}


@app.post("/feasibility")
def feasibility(scenario: ScenarioConfig):
    """Evaluate the signaling constraint chain for one scenario."""
    payload = scenario.model_dump()
    try:
        planck = scenario.in_planck_units()
        report = check_ftl_chain(planck.interferometer_setup(), planck.alice_quadrupole(), planck.internal_energies())
    except (ConfigError, ValidationError) as e:
        audit_logger.log_run("POST /feasibility", payload, {"error": str(e)}, "INVALID")
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except NumericalError as e:
        audit_logger.log_run("POST /feasibility", payload, {"error": str(e)}, "FAILED")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))

    result = report.as_dict()
    audit_logger.log_run("POST /feasibility", payload, {"verdict": result["verdict"]}, "OK")
    return JSONResponse(result)


@app.get("/constants")
def constants():
    rows = [row.as_dict() for row in derive_constants()]
    audit_logger.log_run("GET /constants", {}, {"rows": len(rows)}, "OK")
    return {"constants": rows}


@app.get("/trajectory")
def optimal_trajectory(samples: int = Query(default=config["trajectory"]["samples"], ge=2, le=100_000)):
    """Optimal closing shape ξ(τ) sampled on [0, 1] with its headline numbers."""
    sampled = trajectory.optimal_trajectory(1.0, 1.0, samples)
    result = {
        "S": trajectory.s_functional(trajectory.OPTIMAL),
        "a": trajectory.OPTIMAL_A,
        "v_max_ratio": trajectory.speed_ratio(),
        "kappa": trajectory.kappa(),
        "tau": sampled.times.tolist(),
        "xi": sampled.positions.tolist(),
        "xi_dot": sampled.velocities.tolist(),
    }
    audit_logger.log_run("GET /trajectory", {"samples": samples}, {"S": result["S"]}, "OK")
    return result
