#!/usr/bin/env python3
"""
Configuration for the Fréchet toolkit
Environment (and .env) driven settings with safe defaults
"""

import os
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class FrechetConfig:
    """Runtime settings; every field has a default used when the environment is silent"""

    def __init__(self):
        # Default values (used if the environment does not override them)
        self.seed = 0
        self.tol = 1e-6
        self.param_tol = 1e-9
        self.theta_tol = 1e-9
        self.frames = 64
        self.enumeration_cap = 1_000_000
        self.hausdorff_samples = 256
        self.circle_samples = 48
        self.grazing_angle = 1e-3
        self.dodge_window = 0.05
        self.qtip_window = 0.02
        self.qtip_segments = 8
        self.lift_bump = 0.0
        self.lift_ramp = 0.05
        self.event_samples = 2
        self.report_timing = False
        self.log_level = 'INFO'

    def load_from_environment(self):
        """Load configuration from environment variables"""
        self.seed = self._get_int('FRECHET_SEED', self.seed)
        self.tol = self._get_float('FRECHET_TOL', self.tol)
        self.param_tol = self._get_float('FRECHET_PARAM_TOL', self.param_tol)
        self.theta_tol = self._get_float('FRECHET_THETA_TOL', self.theta_tol)
        self.frames = self._get_int('FRECHET_FRAMES', self.frames)
        self.enumeration_cap = self._get_int('FRECHET_ENUM_CAP', self.enumeration_cap)
        self.hausdorff_samples = self._get_int('FRECHET_HAUSDORFF_SAMPLES', self.hausdorff_samples)
        self.circle_samples = self._get_int('FRECHET_CIRCLE_SAMPLES', self.circle_samples)
        self.grazing_angle = self._get_float('FRECHET_GRAZING_ANGLE', self.grazing_angle)
        self.dodge_window = self._get_float('FRECHET_DODGE_WINDOW', self.dodge_window)
        self.qtip_window = self._get_float('FRECHET_QTIP_WINDOW', self.qtip_window)
        self.qtip_segments = self._get_int('FRECHET_QTIP_SEGMENTS', self.qtip_segments)
        self.lift_bump = self._get_float('FRECHET_LIFT_BUMP', self.lift_bump)
        self.lift_ramp = self._get_float('FRECHET_LIFT_RAMP', self.lift_ramp)
        self.event_samples = self._get_int('FRECHET_EVENT_SAMPLES', self.event_samples)
        self.report_timing = os.getenv('FRECHET_REPORT_TIMING', 'false').lower() == 'true'
        self.log_level = os.getenv('FRECHET_LOG_LEVEL', self.log_level).upper()
        return self

    def tolerances(self):
        """Default Tolerances built from this configuration"""
        from geometry import Tolerances
        return Tolerances(eps_dist=self.tol, eps_param=self.param_tol, theta_tol=self.theta_tol)

    def as_dict(self) -> dict:
        return dict(vars(self))

    @staticmethod
    def _get_int(name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or raw.strip() == '':
            return default
        try:
            return int(raw)
        except ValueError:
            logger.warning(f"⚠️ Ignoring {name}={raw!r} (not an integer), using {default}")
            return default

    @staticmethod
    def _get_float(name: str, default: float) -> float:
        raw = os.getenv(name)
        if raw is None or raw.strip() == '':
            return default
        try:
            return float(raw)
        except ValueError:
            logger.warning(f"⚠️ Ignoring {name}={raw!r} (not a number), using {default}")
            return default


# Global configuration instance
config = FrechetConfig().load_from_environment()


def default_tolerances():
    """Tolerances from the global configuration"""
    return config.tolerances()
