#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Numerics, energy models, fusion, data pipeline and metrics"""
