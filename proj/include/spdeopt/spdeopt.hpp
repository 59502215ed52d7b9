#pragma once

// Umbrella header for the whole library.

#include "commands.hpp"
