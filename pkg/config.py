import os

from dotenv import load_dotenv

load_dotenv()


class Settings:
    def __init__(self):
        self.log_level = os.getenv("TROPHODGE_LOG_LEVEL", "INFO").upper()
        self.seed = int(os.getenv("TROPHODGE_SEED", "0"))
        self.output_format = os.getenv("TROPHODGE_OUTPUT_FORMAT", "table")
        self.sentry_dsn = os.getenv("SENTRY_DSN")

    @property
    def sentry_enabled(self) -> bool:
        return bool(self.sentry_dsn)


VERSION = "0.1.0"

CONVENTIONS = {
    "sign": "n_delta = sign(gamma, delta) * n_gamma ^ e_in",
    "orientation": "wedge of the stored tangent basis",
    "differential": "sign-twisted restriction plus sign-twisted Gysin",
    "psi": "epsilon(a, b) = (-1)^(a + b/2)",
}
