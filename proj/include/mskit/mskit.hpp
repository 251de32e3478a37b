#pragma once

// Everything except PNG I/O (png_io.hpp needs libpng).

#include "mskit/adaptive_net.hpp"
#include "mskit/atomic_file.hpp"
#include "mskit/correlation.hpp"
#include "mskit/error.hpp"
#include "mskit/mask_augment.hpp"
#include "mskit/msi.hpp"
#include "mskit/parallel.hpp"
#include "mskit/raster.hpp"
#include "mskit/slicevis.hpp"
#include "mskit/smoothing.hpp"
#include "mskit/synthetic.hpp"
#include "mskit/training.hpp"
#include "mskit/trajectory.hpp"
#include "mskit/trajectory_io.hpp"
