#
# -*- coding: utf-8 -*-
#
