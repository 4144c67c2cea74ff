#pragma once

#include "tncap/error.hpp"
#include "tncap/structure.hpp"
#include "tncap/tensor.hpp"
#include "tncap/contract.hpp"
#include "tncap/tt.hpp"
#include "tncap/bounds.hpp"
#include "tncap/parallel.hpp"
#include "tncap/shattering.hpp"
#include "tncap/learn.hpp"
#include "tncap/io.hpp"
