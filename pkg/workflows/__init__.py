"""Workflow modules for wtkin's reproducible experiments"""
