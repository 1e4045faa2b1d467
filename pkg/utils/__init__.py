"""Utility modules for wtkin"""
