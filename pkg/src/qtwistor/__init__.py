"""Quaternionic linear algebra, projective maps and twistoriality checks."""
from .errors import QTwistorError
from .quaternion import I, J, K, ONE, ImaginaryUnit, Quaternion, UnitQuaternion
from .hlinear import HMatrix, HVector, RealLinearMap, embed, extract_hmatrix, is_hlinear, left_mult_operator
from .qlinear import SphereMap, check_quaternionic, decompose, is_quaternionic, recover_sphere_map
from .fueter import c_operator, fueter_split, fueter_suite, is_fueter
from .projective import CPPoint, HPPoint, ProjectiveSample, phi_A, recover_matrix
from .flat import SmoothMap, tau_prime_residual, tau_residual, twistor_report

__version__ = "0.1.0"

__all__ = [
    "QTwistorError", "I", "J", "K", "ONE", "ImaginaryUnit", "Quaternion", "UnitQuaternion",
    "HMatrix", "HVector", "RealLinearMap", "embed", "extract_hmatrix", "is_hlinear",
    "left_mult_operator", "SphereMap", "check_quaternionic", "decompose", "is_quaternionic",
    "recover_sphere_map", "c_operator", "fueter_split", "fueter_suite", "is_fueter",
    "CPPoint", "HPPoint", "ProjectiveSample", "phi_A", "recover_matrix", "SmoothMap",
    "tau_prime_residual", "tau_residual", "twistor_report",
]
