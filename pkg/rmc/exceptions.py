# -*- coding: utf-8 -*-
class ClientException(Exception):
    """
    An exception which marks an error made by the invoker.

    Some examples of when to use this are:
    - Malformed/Incorrect command line flags
    - A box whose lower bound is not below its upper bound
    - A density which takes a negative value on its support

    """
    pass


class ExpressionError(ClientException):
    """Base class for errors raised while parsing a model expression."""
    pass


class ExpressionSyntaxError(ExpressionError):

    def __init__(self, message, text, position, expected=None):
        """
        :param position: character index into ``text``; ``offset`` reports it in UTF-8 bytes
        """
        self.text = text
        self.position = position
        self.offset = len(text[:position].encode('utf-8'))
        self.expected = expected
        super(ExpressionSyntaxError, self).__init__(message)

    def __str__(self):
        pointer = ' ' * self.position + '^'
        hint = ' (expected {})'.format(self.expected) if self.expected else ''
        return 'Syntax error at offset {offset}: {message}{hint}\n  {text}\n  {pointer}'.format(
            offset=self.offset,
            message=self.args[0],
            hint=hint,
            text=self.text,
            pointer=pointer
        )


class UnknownIdentifierError(ExpressionError):
    """``offset`` is in UTF-8 bytes when known."""

    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        super(UnknownIdentifierError, self).__init__('Unknown identifier "{}"'.format(name))


class ArityError(ExpressionError):

    def __init__(self, name, expected, got):
        self.name = name
        self.expected = expected
        self.got = got
        super(ArityError, self).__init__(
            'Function "{}" takes {} argument(s), {} given'.format(name, expected, got))


class EvaluationError(ClientException):
    """
    A domain fault raised while evaluating an expression, carrying the offending node.

    Evaluation never returns NaN: log of x <= 0, sqrt of x < 0, division by zero,
    0 to a negative power and any other non-finite result end up here.
    """

    def __init__(self, node, message, point=None):
        self.node = node
        self.point = point
        super(EvaluationError, self).__init__(message)

    def __str__(self):
        where = ' at {}'.format(list(self.point)) if self.point is not None else ''
        return '{message} in "{node}"{where}'.format(message=self.args[0], node=self.node, where=where)


class SamplingException(Exception):
    """
    An Exception which marks an error that occurred while building a target or sampling from it.

    This Exception provides a method for consistent and well-handled error messaging.
    """

    class Preset(object):
        """
        Constants available for use as preset arguments to the initializer
        """
        BUDGET_EXHAUSTED = "budget_exhausted"
        ENVELOPE_VIOLATED = "envelope_violated"
        NEGATIVE_DENSITY = "negative_density"
        ZERO_MASS = "zero_mass"
        INVALID_BOX = "invalid_box"
        UNKNOWN = "unknown"

    # Dictionary of cause messages
    causes = {
        Preset.BUDGET_EXHAUSTED: "The sampler exceeded its proposal budget.",
        Preset.ENVELOPE_VIOLATED: "The envelope constant is smaller than the density at a probe point.",
        Preset.NEGATIVE_DENSITY: "The density takes a negative value on the support box.",
        Preset.ZERO_MASS: "The envelope has zero mass over the support box.",
        Preset.INVALID_BOX: "The support box is degenerate.",
        Preset.UNKNOWN: "Something unexpected occurred.",
    }

    # Dictionary of assistance/remediation messages
    assistances = {
        Preset.BUDGET_EXHAUSTED: "The envelope is grossly loose or the density is nearly zero on the box. "
                                 "Tighten the bound or shrink the box.",
        Preset.ENVELOPE_VIOLATED: "Raise the bound or omit it so that it is estimated from a grid.",
        Preset.NEGATIVE_DENSITY: "Densities and screened integrands must be nonnegative on the box.",
        Preset.ZERO_MASS: "Check that the density is positive somewhere inside the box.",
        Preset.INVALID_BOX: "Every lower bound must be strictly below its upper bound.",
        Preset.UNKNOWN: "Check the logs and if the issue persists please report it.",
    }

    def __init__(self, cause=None, assistance=None, data=None, preset=None):
        """
        Initializes a new SamplingException. User must supply all punctuation/grammar.
        :param cause: Cause of the error. Leave empty if using preset.
        :param assistance: Possible remediation steps for the error. Leave empty if using preset.
        :param data: Possible data related to the error.
        :param preset: Preset error and remediation steps to use.
        """
        super(SamplingException, self).__init__(cause or preset)
        if preset:
            self.cause, self.assistance = self.causes[preset], self.assistances[preset]
        else:
            self.cause = cause if cause else ""
            self.assistance = assistance if assistance else ""

        self.preset = preset
        self.data = data if data else ""

    def __str__(self):
        if self.data:
            return "{cause} {assistance} Details: {data}".format(
                cause=self.cause,
                assistance=self.assistance,
                data=self.data
            )
        else:
            return "{cause} {assistance}".format(
                cause=self.cause,
                assistance=self.assistance
            )


class BudgetExhausted(SamplingException):

    def __init__(self, proposals_drawn, accepted, budget):
        self.proposals_drawn = proposals_drawn
        self.accepted = accepted
        self.budget = budget
        self.acceptance_rate = accepted / proposals_drawn if proposals_drawn else 0.0
        super(BudgetExhausted, self).__init__(
            preset=SamplingException.Preset.BUDGET_EXHAUSTED,
            data='{} proposals drawn (budget {}), {} accepted, running acceptance rate {:.3g}'.format(
                proposals_drawn, budget, accepted, self.acceptance_rate))


class EnvelopeViolation(SamplingException):

    def __init__(self, point, value, bound):
        self.point = tuple(float(v) for v in point)
        self.value = float(value)
        self.bound = float(bound)
        super(EnvelopeViolation, self).__init__(
            preset=SamplingException.Preset.ENVELOPE_VIOLATED,
            data='f{} = {!r} > c = {!r}'.format(self.point, self.value, self.bound))


class ValidationFailed(Exception):
    """
    A goodness-of-fit check rejected the sampled distribution.
    """

    def __init__(self, report):
        super(ValidationFailed, self).__init__(
            '{} statistic {:.6g} is not below threshold {:.6g}'.format(report.kind, report.statistic, report.threshold))
        self.report = report


class LoggedException(Exception):
    """
    An Exception which holds the run metadata already produced.
    """

    def __init__(self, ex, output):
        super(LoggedException, self).__init__(ex)
        self.ex = ex
        self.output = output
