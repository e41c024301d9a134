#pragma once

#include "tracewise/core_model.hpp"
#include "tracewise/instance.hpp"
#include "tracewise/trace.hpp"

#include <vector>

namespace tracewise {

// State keys per kind:
//   counting        "i:c" (index, running count), initial "-1:0"
//   sliding window  "L,R=max", initial "start"
//   flood fill      "<visited bitmap>|<island id>|r,c", initial "<zeros>|0|-"
//   edit distance   "i,j=cost", initial "start"
//   clustering      sorted cluster names joined by '|'
//   factorization   "S r q" after STATE(r) with next candidate q,
//                   "A r p True|False" after ATTEMPT(r,p)
//   permutation     "[a,b,...]" partial paths; BACKTRACK returns to the parent
//   game24          canonical form of an attempted expression, initial "start"
// Linear kinds and factorization end in the goal state "END".
AbstractProblem adapt_to_abstract(const TaskInstance& instance);

// Maps directives to the states they declare, prefixed by the initial state.
std::vector<StateRef> trace_to_steps(const TaskInstance& instance,
                                     const std::vector<Directive>& directives);

} // namespace tracewise
