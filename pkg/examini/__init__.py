"""
examini - instrumented exascale mini-apps with POP trace analysis and scaling campaigns
"""

__version__ = "0.3.0"
__author__ = "examini developers"
