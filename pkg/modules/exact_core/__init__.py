from .rings import *
from .matrices import *
from .smith import *
