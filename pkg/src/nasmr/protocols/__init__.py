from .aba import BinaryAgreement
from .acs import CommonSubset
from .base import Ask, Env, Note, Protocol, ProtocolError, Send, Timer
from .bla import BlockAgreement, GradedConsensus, ProposeInstance
from .rbc import ReliableBroadcast, rbc_init
from .smr import StateMachineReplication, WeakAgreement

__all__ = [
    "Ask", "BinaryAgreement", "BlockAgreement", "CommonSubset", "Env", "GradedConsensus", "Note",
    "ProposeInstance", "Protocol", "ProtocolError", "ReliableBroadcast", "Send",
    "StateMachineReplication", "Timer", "WeakAgreement", "rbc_init",
]
