//! Canonical layer lists for the six model families and their four
//! fine-tuning variants each.
//!
//! Every convolution is encoded on the grid it sweeps ("same" padding), so a
//! stride-`s` layer on an `l x l` grid produces `l/s x l/s`. Batch-norm is an
//! `Other` activation with two ops per element (scale and shift); residual
//! adds are `Other` with one op per element.

use super::{
    ActivationKind, ActivationLayer, AlphaTable, ArchitectureSpec, ConvLayer, FcLayer, Layer,
    PoolLayer, StrideMode,
};

const BN_ALPHA: f64 = 2.0;
const ADD_ALPHA: f64 = 1.0;

pub const ALEXNET: &str = "Alexnet";
pub const INCEPTION_V3: &str = "InceptionV3";
pub const RESNET50: &str = "Resnet50";
pub const RESNET101: &str = "Resnet101";
pub const MOBILENET_V1: &str = "MobilenetV1";
pub const MOBILENET_V2: &str = "MobilenetV2";

/// Tracks the running tensor shape while layers are appended.
struct Net {
    layers: Vec<Layer>,
    c: u64,
    l: u64,
    flat: Option<u64>,
    pending_branch: bool,
    alpha: AlphaTable,
}

impl Net {
    fn new(c: u64, l: u64) -> Self {
        Self {
            layers: Vec::new(),
            c,
            l,
            flat: None,
            pending_branch: false,
            alpha: AlphaTable::default(),
        }
    }

    fn push(&mut self, layer: impl Into<Layer>) {
        let mut layer = layer.into();
        layer.branch = std::mem::take(&mut self.pending_branch);
        self.layers.push(layer);
    }

    /// Next layer reads a tensor of the given shape instead of the previous
    /// layer's output.
    fn read(&mut self, c: u64, l: u64) -> &mut Self {
        self.c = c;
        self.l = l;
        self.pending_branch = true;
        self
    }

    fn conv_rect(&mut self, n: u64, fh: u64, fw: u64, s: u64) -> &mut Self {
        let mut layer = ConvLayer::new(self.c, self.l, self.l, s, n, fh);
        if fw != fh {
            layer.fw = Some(fw);
        }
        self.push(layer);
        self.c = n;
        self.l /= s;
        self
    }

    fn conv(&mut self, n: u64, f: u64, s: u64) -> &mut Self {
        self.conv_rect(n, f, f, s)
    }

    fn depthwise(&mut self, f: u64, s: u64) -> &mut Self {
        let mut layer = ConvLayer::new(self.c, self.l, self.l, s, self.c, f);
        layer.groups = self.c;
        self.push(layer);
        self.l /= s;
        self
    }

    fn act(&mut self, kind: ActivationKind) -> &mut Self {
        let layer = match self.flat {
            Some(n) => ActivationLayer::new(kind, n, 1, 1, &self.alpha),
            None => ActivationLayer::new(kind, self.c, self.l, self.l, &self.alpha),
        };
        self.push(layer);
        self
    }

    fn relu(&mut self) -> &mut Self {
        self.act(ActivationKind::Relu)
    }

    fn other(&mut self, alpha: f64) -> &mut Self {
        self.push(ActivationLayer::other(self.c, self.l, self.l, alpha));
        self
    }

    fn bn(&mut self) -> &mut Self {
        self.other(BN_ALPHA)
    }

    fn add(&mut self) -> &mut Self {
        self.other(ADD_ALPHA)
    }

    /// Convolution, batch-norm, relu.
    fn cbr(&mut self, n: u64, f: u64, s: u64) -> &mut Self {
        self.conv(n, f, s).bn().relu()
    }

    fn cbr_rect(&mut self, n: u64, fh: u64, fw: u64) -> &mut Self {
        self.conv_rect(n, fh, fw, 1).bn().relu()
    }

    fn pool(&mut self, f: u64, s: u64) -> &mut Self {
        self.push(PoolLayer::new(self.c, self.l, self.l, s, f));
        self.l /= s;
        self
    }

    fn fc(&mut self, y: u64) -> &mut Self {
        let x = self.flat.unwrap_or(self.c * self.l * self.l);
        self.push(FcLayer::new(x, y));
        self.flat = Some(y);
        self
    }

    fn finish(self, name: &str, variant: &str, mode: StrideMode) -> ArchitectureSpec {
        ArchitectureSpec {
            name: name.to_string(),
            variant: variant.to_string(),
            stride_mode: mode,
            layers: self.layers,
        }
    }
}

fn classifier_head(net: &mut Net, classes: u64) {
    net.fc(classes).act(ActivationKind::Softmax);
}

/// Five convolutions, three max-pools, three fully connected layers on a
/// 224x224 input.
pub fn alexnet(fc: [u64; 3]) -> ArchitectureSpec {
    let mut net = Net::new(3, 224);
    net.conv(96, 11, 4).relu().pool(3, 2);
    net.conv(256, 5, 1).relu().pool(3, 2);
    net.conv(384, 3, 1).relu();
    net.conv(384, 3, 1).relu();
    net.conv(256, 3, 1).relu().pool(3, 2);
    net.fc(fc[0]).relu();
    net.fc(fc[1]).relu();
    classifier_head(&mut net, fc[2]);
    let variant = format!("{}*{}*{}", fc[0], fc[1], fc[2]);
    net.finish(ALEXNET, &variant, StrideMode::Strict)
}

/// Bottleneck residual network (1x1, 3x3, 1x1 with 4x expansion).
pub fn resnet(name: &str, classes: u64, blocks: [u64; 4]) -> ArchitectureSpec {
    let mut net = Net::new(3, 224);
    net.cbr(64, 7, 2).pool(3, 2);
    let widths = [64, 128, 256, 512];
    for (stage, (&width, &count)) in widths.iter().zip(&blocks).enumerate() {
        for block in 0..count {
            let stride = if stage > 0 && block == 0 { 2 } else { 1 };
            let (cin, lin) = (net.c, net.l);
            net.cbr(width, 1, 1).cbr(width, 3, stride);
            net.conv(width * 4, 1, 1).bn();
            if block == 0 {
                net.read(cin, lin).conv(width * 4, 1, stride).bn();
            }
            net.add().relu();
        }
    }
    net.pool(7, 7);
    classifier_head(&mut net, classes);
    let variant = format!(
        "{classes},({},{},{},{})",
        blocks[0], blocks[1], blocks[2], blocks[3]
    );
    net.finish(name, &variant, StrideMode::Strict)
}

/// Runs each branch from the block input and leaves the net reading the
/// channel-wise concatenation.
fn inception_block(net: &mut Net, branches: &[&dyn Fn(&mut Net)]) {
    let (cin, lin) = (net.c, net.l);
    let mut cout = 0;
    let mut lout = lin;
    for branch in branches {
        net.read(cin, lin);
        branch(net);
        cout += net.c;
        lout = net.l;
    }
    net.read(cout, lout);
}

/// Inception-v3 on a 280x280 input so the main grids are 35, 17 and 8. The
/// stride-2 reductions from 35 and 17 are floored.
pub fn inception_v3(classes: u64) -> ArchitectureSpec {
    let mut net = Net::new(3, 280);
    net.cbr(32, 3, 2).cbr(32, 3, 1).cbr(64, 3, 1).pool(3, 2);
    net.cbr(80, 1, 1).cbr(192, 3, 1).pool(3, 2);

    for pool_features in [32, 64, 64] {
        inception_block(
            &mut net,
            &[
                &|n: &mut Net| {
                    n.cbr(64, 1, 1);
                },
                &|n: &mut Net| {
                    n.cbr(48, 1, 1).cbr(64, 5, 1);
                },
                &|n: &mut Net| {
                    n.cbr(64, 1, 1).cbr(96, 3, 1).cbr(96, 3, 1);
                },
                &|n: &mut Net| {
                    n.pool(3, 1).cbr(pool_features, 1, 1);
                },
            ],
        );
    }

    inception_block(
        &mut net,
        &[
            &|n: &mut Net| {
                n.cbr(384, 3, 2);
            },
            &|n: &mut Net| {
                n.cbr(64, 1, 1).cbr(96, 3, 1).cbr(96, 3, 2);
            },
            &|n: &mut Net| {
                n.pool(3, 2);
            },
        ],
    );

    for c7 in [128, 160, 160, 192] {
        inception_block(
            &mut net,
            &[
                &|n: &mut Net| {
                    n.cbr(192, 1, 1);
                },
                &|n: &mut Net| {
                    n.cbr(c7, 1, 1).cbr_rect(c7, 1, 7).cbr_rect(192, 7, 1);
                },
                &|n: &mut Net| {
                    n.cbr(c7, 1, 1)
                        .cbr_rect(c7, 7, 1)
                        .cbr_rect(c7, 1, 7)
                        .cbr_rect(c7, 7, 1)
                        .cbr_rect(192, 1, 7);
                },
                &|n: &mut Net| {
                    n.pool(3, 1).cbr(192, 1, 1);
                },
            ],
        );
    }

    inception_block(
        &mut net,
        &[
            &|n: &mut Net| {
                n.cbr(192, 1, 1).cbr(320, 3, 2);
            },
            &|n: &mut Net| {
                n.cbr(192, 1, 1)
                    .cbr_rect(192, 1, 7)
                    .cbr_rect(192, 7, 1)
                    .cbr(192, 3, 2);
            },
            &|n: &mut Net| {
                n.pool(3, 2);
            },
        ],
    );

    for _ in 0..2 {
        inception_block(
            &mut net,
            &[
                &|n: &mut Net| {
                    n.cbr(320, 1, 1);
                },
                &|n: &mut Net| {
                    let l = n.l;
                    n.cbr(384, 1, 1).cbr_rect(384, 1, 3);
                    // 3x1 half reads the same 1x1 output; halves concatenate
                    n.read(384, l).cbr_rect(384, 3, 1);
                    n.c = 768;
                },
                &|n: &mut Net| {
                    let l = n.l;
                    n.cbr(448, 1, 1).cbr(384, 3, 1).cbr_rect(384, 1, 3);
                    n.read(384, l).cbr_rect(384, 3, 1);
                    n.c = 768;
                },
                &|n: &mut Net| {
                    n.pool(3, 1).cbr(192, 1, 1);
                },
            ],
        );
    }

    net.pool(8, 8);
    classifier_head(&mut net, classes);
    net.finish(INCEPTION_V3, &classes.to_string(), StrideMode::Permissive)
}

/// Depthwise-separable network, width multiplier 1.0.
pub fn mobilenet_v1(classes: u64) -> ArchitectureSpec {
    let mut net = Net::new(3, 224);
    net.cbr(32, 3, 2);
    let blocks: [(u64, u64); 13] = [
        (64, 1),
        (128, 2),
        (128, 1),
        (256, 2),
        (256, 1),
        (512, 2),
        (512, 1),
        (512, 1),
        (512, 1),
        (512, 1),
        (512, 1),
        (1024, 2),
        (1024, 1),
    ];
    for (out, s) in blocks {
        net.depthwise(3, s).bn().relu();
        net.cbr(out, 1, 1);
    }
    net.pool(7, 7);
    classifier_head(&mut net, classes);
    net.finish(MOBILENET_V1, &classes.to_string(), StrideMode::Strict)
}

/// Inverted-residual network with linear bottlenecks, width multiplier 1.0.
pub fn mobilenet_v2(classes: u64) -> ArchitectureSpec {
    let mut net = Net::new(3, 224);
    net.cbr(32, 3, 2);
    // (expansion, output channels, repeats, first stride)
    let settings: [(u64, u64, u64, u64); 7] = [
        (1, 16, 1, 1),
        (6, 24, 2, 2),
        (6, 32, 3, 2),
        (6, 64, 4, 2),
        (6, 96, 3, 1),
        (6, 160, 3, 2),
        (6, 320, 1, 1),
    ];
    for (t, c, n, s) in settings {
        for i in 0..n {
            let stride = if i == 0 { s } else { 1 };
            let cin = net.c;
            if t != 1 {
                net.cbr(cin * t, 1, 1);
            }
            net.depthwise(3, stride).bn().relu();
            net.conv(c, 1, 1).bn();
            if stride == 1 && cin == c {
                net.add();
            }
        }
    }
    net.cbr(1280, 1, 1);
    net.pool(7, 7);
    classifier_head(&mut net, classes);
    net.finish(MOBILENET_V2, &classes.to_string(), StrideMode::Strict)
}

/// The 24 fine-tuning entries, six families of four, in catalog order.
pub fn canonical_zoo() -> Vec<ArchitectureSpec> {
    let mut zoo = Vec::with_capacity(24);
    for fc in [
        [4096, 4096, 1000],
        [4096, 4096, 500],
        [4096, 2048, 500],
        [2048, 2048, 500],
    ] {
        zoo.push(alexnet(fc));
    }
    for classes in [1000, 750, 500, 250] {
        zoo.push(inception_v3(classes));
    }
    for (classes, blocks) in [
        (1000, [3, 4, 6, 3]),
        (1000, [3, 6, 4, 3]),
        (500, [3, 6, 4, 3]),
        (500, [3, 5, 5, 3]),
    ] {
        zoo.push(resnet(RESNET50, classes, blocks));
    }
    for (classes, blocks) in [
        (1000, [3, 4, 23, 3]),
        (1000, [3, 7, 20, 3]),
        (500, [3, 14, 13, 3]),
        (500, [3, 17, 10, 3]),
    ] {
        zoo.push(resnet(RESNET101, classes, blocks));
    }
    for classes in [1000, 750, 500, 250] {
        zoo.push(mobilenet_v1(classes));
    }
    for classes in [1000, 750, 500, 250] {
        zoo.push(mobilenet_v2(classes));
    }
    zoo
}
