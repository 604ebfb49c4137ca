"""Exception hierarchy shared by the wrapper reader, tools and server."""


class PFSError(Exception):
    pass


class FormatError(PFSError, ValueError):
    """A wrapper file does not follow the PFS grammar.

    ``entity`` is the ordinal of the entity being parsed when the problem
    was found, or None for header-level problems.
    """

    def __init__(self, message, entity=None):
        super().__init__(message)
        self.entity = entity


class MissingMagic(FormatError): pass
class MalformedTagLine(FormatError): pass
class DuplicatePath(FormatError): pass
class PayloadOverrun(FormatError): pass
class MissingRequiredKey(FormatError): pass
class BadValue(FormatError): pass
class BadEnumValue(BadValue): pass
class BadFraming(FormatError): pass
class InvalidName(FormatError): pass


class PathError(PFSError, ValueError): pass
class TraversalRejected(PathError): pass
class IllegalByte(PathError): pass
class AbsoluteRemainder(PathError): pass


class ContentError(PFSError): pass
class DecodeError(ContentError, ValueError): pass
class LengthMismatch(ContentError, ValueError): pass
class PayloadLengthMismatch(ContentError, ValueError): pass
class RemoteEntity(ContentError): pass
class UnrepresentableValue(PFSError, ValueError): pass


class ToolError(PFSError): pass
class UnreadableFile(ToolError): pass
class OutputExists(ToolError): pass
class DestinationCollision(ToolError): pass
class SymlinkCycle(ToolError): pass
class NotFound(ToolError, KeyError): pass


class FetchError(PFSError): pass
class BadScheme(FetchError, ValueError): pass
class Timeout(FetchError): pass
class ConnectFailure(FetchError): pass
class TooLarge(FetchError): pass
class RedirectLoop(FetchError): pass
