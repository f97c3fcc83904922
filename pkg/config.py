import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Debug: Print the grid the toolkit will start from
if os.environ.get('PHASESPACE_DEBUG', 'False').lower() == 'true':
    print(f"🔧 Config loading - grid: [{os.environ.get('PHASESPACE_Q_MIN', '-8')}, "
          f"{os.environ.get('PHASESPACE_Q_MAX', '8')}) x {os.environ.get('PHASESPACE_N_Q', '512')}")

class Config:
    """Basic configuration for the Phase-Space Quasiprobability Toolkit"""

    # Quadrature grid (desk scale)
    Q_MIN = float(os.environ.get('PHASESPACE_Q_MIN', '-8'))
    Q_MAX = float(os.environ.get('PHASESPACE_Q_MAX', '8'))
    N_Q = int(os.environ.get('PHASESPACE_N_Q', '512'))

    # Oscillator frame; HBAR doubles as the normalized wavelength in optics mode
    HBAR = float(os.environ.get('PHASESPACE_HBAR', '1'))
    MASS = float(os.environ.get('PHASESPACE_MASS', '1'))
    OMEGA = float(os.environ.get('PHASESPACE_OMEGA', '1'))

    # Output settings
    OUTPUT_FORMAT = os.environ.get('PHASESPACE_FORMAT', 'bin')
    OUTPUT_DIR = os.environ.get('PHASESPACE_OUTPUT_DIR', '.')
    LOG_LEVEL = os.environ.get('PHASESPACE_LOG_LEVEL', 'INFO')

    # Noise utilities
    SEED = int(os.environ.get('PHASESPACE_SEED', '0'))

    # Numerical tolerances
    EDGE_TOLERANCE = float(os.environ.get('PHASESPACE_EDGE_TOLERANCE', '1e-8'))
    REALNESS_TOLERANCE = float(os.environ.get('PHASESPACE_REALNESS_TOLERANCE', '1e-10'))
    TAIL_TOLERANCE = float(os.environ.get('PHASESPACE_TAIL_TOLERANCE', '1e-8'))
    STATS_TAIL_TOLERANCE = float(os.environ.get('PHASESPACE_STATS_TAIL_TOLERANCE', '1e-6'))
    NEGATIVITY_TOLERANCE = float(os.environ.get('PHASESPACE_NEGATIVITY_TOLERANCE', '1e-9'))
    NORM_DRIFT_TOLERANCE = float(os.environ.get('PHASESPACE_NORM_DRIFT_TOLERANCE', '1e-6'))
    RK4_STABILITY_LIMIT = float(os.environ.get('PHASESPACE_RK4_STABILITY_LIMIT', '2.5'))

    # Measurement and reconstruction defaults
    HANN_CUTOFF = float(os.environ.get('PHASESPACE_HANN_CUTOFF', '1.0'))
    DEFAULT_ANGLES = int(os.environ.get('PHASESPACE_ANGLES', '64'))
    MIN_TOMOGRAPHY_ANGLES = 16
    RING_CUTOFF = int(os.environ.get('PHASESPACE_RING_CUTOFF', '64'))
    RING_POINTS = int(os.environ.get('PHASESPACE_RING_POINTS', '64'))
    OVERLAP_RESOLUTION = int(os.environ.get('PHASESPACE_OVERLAP_RESOLUTION', '1024'))

    # Supported output formats
    OUTPUT_FORMATS = ['bin', 'csv', 'pgm']

    # Highest polynomial degree the Moyal series handles exactly
    MAX_POTENTIAL_DEGREE = 6
