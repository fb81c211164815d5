#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Terminal display, progress bars and the interactive menu"""
