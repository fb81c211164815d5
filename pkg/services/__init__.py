#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""One service per command"""
