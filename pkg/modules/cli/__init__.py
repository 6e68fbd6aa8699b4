from .signature import *
from .scenario import *
from .runner import *
