// Umbrella header: the whole library in dependency order.
#pragma once

#include <zenofuse/hilbert.hpp>
#include <zenofuse/hamiltonian.hpp>
#include <zenofuse/zeno.hpp>
#include <zenofuse/dynamics.hpp>
#include <zenofuse/fusion.hpp>
#include <zenofuse/scenario.hpp>
