#pragma once

#include "tac/error.hpp"
#include "tac/term.hpp"
#include "tac/rewriting.hpp"
#include "tac/automaton.hpp"
#include "tac/algebra.hpp"
#include "tac/constructions.hpp"
#include "tac/completion.hpp"
#include "tac/guard.hpp"
#include "tac/oracle.hpp"
#include "tac/spec_file.hpp"
