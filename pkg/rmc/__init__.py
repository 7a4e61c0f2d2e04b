# -*- coding: utf-8 -*-
__version__ = '1.0.0'

import rmc.expression
import rmc.randomness
import rmc.model
import rmc.samplers
import rmc.integrator
import rmc.stats
import rmc.exceptions

parse = rmc.expression.parse
VarOrder = rmc.expression.VarOrder
RandomStream = rmc.randomness.RandomStream
make_stream = rmc.randomness.make_stream
substream = rmc.randomness.substream
Box = rmc.model.Box
ScalarField = rmc.model.ScalarField
TargetSpec = rmc.model.TargetSpec
validate_target = rmc.model.validate_target
build_piecewise_proposal = rmc.model.build_piecewise_proposal
srmc_sample = rmc.samplers.srmc_sample
grmc_sample = rmc.samplers.grmc_sample
integrate_screened = rmc.integrator.integrate_screened
integrate_direct = rmc.integrator.integrate_direct
ks_test_1d = rmc.stats.ks_test_1d
chi_square_box = rmc.stats.chi_square_box
summarize = rmc.stats.summarize
ClientException = rmc.exceptions.ClientException
SamplingException = rmc.exceptions.SamplingException
