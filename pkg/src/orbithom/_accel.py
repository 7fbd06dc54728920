"""Numba switch.

Set ``ORBITHOM_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba
is missing the numpy kernels are used automatically.
"""

import os

_disabled = os.environ.get("ORBITHOM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("disabled by ORBITHOM_DISABLE_NUMBA")
    from llvmlite import ir
    from numba import njit, types
    from numba.core import cgutils
    from numba.extending import intrinsic

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # used bare (@njit) or with options (@njit(cache=True))
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(func):
            return func

        return wrapper

    def prefetch_row(table, i):
        pass

else:

    @intrinsic
    def prefetch_row(typingctx, table, i):
        """Cache hint for ``table[i, 0]``; no effect on results.

        Hash probes land on random rows of tables larger than the last-level
        cache; issuing the load a few iterations early hides most of the miss.
        """

        def codegen(context, builder, signature, args):
            aryty = signature.args[0]
            ary = context.make_array(aryty)(context, builder, args[0])
            zero = context.get_constant(types.intp, 0)
            ptr = cgutils.get_item_pointer(context, builder, aryty, ary, [args[1], zero])
            i8p = ir.IntType(8).as_pointer()
            i32 = ir.IntType(32)
            fnty = ir.FunctionType(ir.VoidType(), [i8p, i32, i32, i32])
            fn = cgutils.get_or_insert_function(builder.module, fnty, "llvm.prefetch.p0i8")
            # read, high locality, data cache
            builder.call(fn, [builder.bitcast(ptr, i8p), i32(0), i32(3), i32(1)])
            return context.get_dummy_value()

        return types.void(table, types.intp), codegen


__all__ = ["HAVE_NUMBA", "njit", "prefetch_row"]
