#pragma once

#include "ocfs/csv.hpp"
#include "ocfs/data.hpp"
#include "ocfs/error.hpp"
#include "ocfs/errorbars.hpp"
#include "ocfs/fusion.hpp"
#include "ocfs/kernel.hpp"
#include "ocfs/kmedoids.hpp"
#include "ocfs/model_io.hpp"
#include "ocfs/ocsvm.hpp"
#include "ocfs/pipeline.hpp"
#include "ocfs/rfe.hpp"
#include "ocfs/synthetic.hpp"
#include "ocfs/univariate.hpp"
