"""
Result Repository Tests
"""
