"""Bifurcation curve lambda(alpha), turning points and lambda_inf."""

from .curve import (BifurcationCurve, Sample, lambda_infinity, oscillation_report, shoot_lambda,
                    summary_json, trace_curve)

__all__ = ["BifurcationCurve", "Sample", "lambda_infinity", "oscillation_report", "shoot_lambda",
           "summary_json", "trace_curve"]
