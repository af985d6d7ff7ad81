"""Data models: geometry, radios, perception, cases, learning, placement, scenarios and episodes"""
