"""
Experiments Module
Scenario execution and result files
"""
