# lazy_eval/prelude.py
"""
Built-in library definitions and the list generators used by the experiments.

The generator definitions are frozen: absolute measure values reported by the
bench experiments depend on them.
"""

import functools
from pathlib import Path

from .parser import parse_library

PRELUDE_SOURCE = r"""
-- divergence; demanding it is a blackhole
bot = letrec b = b in b;

comp = \f,g.(\x. f (g x));

foldr = \f,z,xs. case xs of { [] -> z; y:ys -> f y (foldr f z ys) };
foldl = \f,z,xs. case xs of { [] -> z; y:ys -> foldl f (f z y) ys };
foldl' = \f,z,xs. case xs of {
    [] -> z;
    y:ys -> letrec w = f z y in seq w (foldl' f w ys)
  };

map = \f,lst. case lst of { [] -> []; x:xs -> f x : map f xs };
tail = \lst. case lst of { [] -> bot; x:xs -> xs };
last = \lst. case lst of {
    [] -> bot;
    x:xs -> case xs of { [] -> x; y:ys -> last xs }
  };

replicate = \n,x. case n of { Zero -> []; Succ m -> x : replicate m x };
take = \n,xs. case n of {
    Zero -> [];
    Succ m -> case xs of { [] -> []; y:ys -> y : take m ys }
  };

reverse = \xs. case xs of { [] -> []; y:ys -> reverse ys ++ [y] };
reverse' = \xs. reversew [] xs;
reversew = \xs,ys. case ys of { [] -> xs; z:zs -> reversew (z:xs) zs };
(++) = \xs,ys. case xs of { [] -> ys; z:zs -> z : (zs ++ ys) };

-- foldr and the inner append are inlined; concatMap names its result cell
concat = \xs. case xs of { [] -> []; y:ys -> y ++ concat ys };
concatMap = \f,xs. case xs of {
    [] -> [];
    y:ys -> letrec r = f y ++ concatMap f ys in r
  };

xor = \x,y. case x of {
    True -> case y of { True -> False; False -> True };
    False -> y
  };
"""

# Source of a k-element list per generator shape; ``$k`` is the element count.
GENERATORS = {
    "OneTrueThenFalse": "take $k (letrec s = False : s in True : s)",
    "AllTrue": "replicate $k True",
    "InnerPairs": "take $k (letrec s = [True, True] : s in s)",
}


@functools.lru_cache(maxsize=None)
def _builtin():
    return parse_library(PRELUDE_SOURCE)


def load_prelude(path=None):
    """The built-in prelude, or the definitions in the file at ``path``."""
    if path is None:
        return _builtin()
    return parse_library(Path(path).read_text(encoding="utf-8"))
