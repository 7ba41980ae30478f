#pragma once

#include "cgp/errors.hpp"
#include "cgp/quadrature.hpp"
#include "cgp/special_functions.hpp"
#include "cgp/gaussian_packet.hpp"
#include "cgp/delta_closed_form.hpp"
#include "cgp/transmission.hpp"
#include "cgp/tdse_oracle.hpp"
#include "cgp/verify.hpp"
