#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Settings, experiment configuration and terminal theme"""
