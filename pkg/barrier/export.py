"""CSV/JSON renderings of barrier profiles, beta sweeps and radius certificates"""
import pandas as pd

from barrier.profile import BarrierProfile
from barrier.search import SupersolutionRadius
from utils.io import render_csv


def profile_frame(profile: BarrierProfile) -> pd.DataFrame:
    return pd.DataFrame({"r": profile.radii, "H": profile.curvatures, "err": profile.errors,
                         "residual": profile.residuals})


def profile_csv(profile: BarrierProfile) -> str:
    spec = profile.spec
    meta = {"n": spec.n, "s": spec.s, "alpha": spec.alpha, "eps": spec.eps,
            "beta": f"{profile.beta:.12g}", "fitted_exponent": f"{profile.fitted_exponent:.6g}",
            "residual_exponent": f"{profile.residual_exponent:.6g}"}
    return render_csv(profile_frame(profile), "barrier-profile", meta)


def profile_json(profile: BarrierProfile) -> str:
    return profile.model_dump_json(indent=2)


def sweep_csv(frame: pd.DataFrame) -> str:
    return render_csv(frame, "beta-sweep")


def certificates_csv(result: SupersolutionRadius) -> str:
    frame = pd.DataFrame([c.model_dump() for c in result.certificates])
    meta = {"s": result.s, "alpha": result.alpha, "R": f"{result.radius:.12g}", "beta": f"{result.beta:.12g}"}
    return render_csv(frame, "supersolution", meta)
