import math

import numpy as np
import pytest

from jacobi_sumrules import (JacobiCoefficients, beta_from_energyme,
                             energy_from_beta)
from conftest import random_jacobi
